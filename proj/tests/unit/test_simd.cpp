// Copyright 2026 The lvx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>

#include <cmath>
#include <vector>

#include "lvx/simd.hpp"
#include "lvx/tensor.hpp"
#include "oracles.hpp"

using namespace lvx;

namespace {

std::vector<const simd::KernelTable*> backends() {
  std::vector<const simd::KernelTable*> out{&simd::scalar_kernels()};
  if (const auto* avx = simd::avx2_kernels()) out.push_back(avx);
  return out;
}

}  // namespace

TEST_CASE("active backend is one of the available ones") {
  const auto& a = simd::active();
  bool found = false;
  for (const auto* b : backends()) found = found || b->backend == a.backend;
  CHECK(found);
  MESSAGE("active kernels: " << simd::backend_name(a.backend));
}

TEST_CASE("float kernels agree with the scalar backend across lengths and offsets") {
  Rng rng(21);
  const auto& ref = simd::scalar_kernels();
  for (const auto* k : backends()) {
    for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 100u}) {
      for (std::size_t off = 0; off < 3; ++off) {
        auto x = oracle::random_vec(n + off, rng), y = oracle::random_vec(n + off, rng);
        auto a = oracle::random_vec(n + off, rng);
        auto y1 = y, y2 = y;
        ref.axpy_f32(0.37f, x.data() + off, y1.data() + off, n);
        k->axpy_f32(0.37f, x.data() + off, y2.data() + off, n);
        for (std::size_t i = 0; i < y1.size(); ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-6f);

        y1 = y, y2 = y;
        ref.fmadd_f32(a.data() + off, x.data() + off, y1.data() + off, n);
        k->fmadd_f32(a.data() + off, x.data() + off, y2.data() + off, n);
        for (std::size_t i = 0; i < y1.size(); ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-6f);

        const float d1 = ref.dot_f32(x.data() + off, y.data() + off, n);
        const float d2 = k->dot_f32(x.data() + off, y.data() + off, n);
        CHECK(std::abs(d1 - d2) <= 1e-5f * (1.0f + static_cast<float>(n)));
      }
    }
  }
}

TEST_CASE("integer kernels are bit-identical across backends") {
  Rng rng(22);
  const auto& ref = simd::scalar_kernels();
  for (const auto* k : backends()) {
    for (std::size_t n : {0u, 1u, 5u, 8u, 15u, 16u, 17u, 33u, 96u, 257u}) {
      for (std::size_t pairs : {1u, 3u, 8u}) {
        std::vector<std::int32_t> xp(pairs);
        for (auto& v : xp)
          v = static_cast<std::int32_t>(static_cast<std::uint16_t>(rng.uniform_int(-255, 255)) |
                                        static_cast<std::uint32_t>(static_cast<std::uint16_t>(rng.uniform_int(-255, 255))) << 16);
        std::vector<std::int16_t> w(2 * n * pairs);
        for (auto& v : w) v = static_cast<std::int16_t>(rng.uniform_int(-128, 127));
        std::vector<std::vector<std::int8_t>> rows(2 * pairs, std::vector<std::int8_t>(n));
        std::vector<const std::int8_t*> ptrs;
        for (auto& r : rows) {
          for (auto& v : r) v = static_cast<std::int8_t>(rng.uniform_int(-128, 127));
          ptrs.push_back(r.data());
        }
        std::vector<std::int32_t> acc(n);
        for (auto& v : acc) v = static_cast<std::int32_t>(rng.uniform_int(-100000, 100000));
        auto a1 = acc, a2 = acc;
        ref.gemv_pairs_i16(xp.data(), pairs, w.data(), a1.data(), n);
        k->gemv_pairs_i16(xp.data(), pairs, w.data(), a2.data(), n);
        CHECK(a1 == a2);
        for (std::int32_t zero : {-128, 0, 127}) {
          a1 = acc, a2 = acc;
          ref.depthwise_pairs_i8(ptrs.data(), pairs, zero, w.data(), a1.data(), n);
          k->depthwise_pairs_i8(ptrs.data(), pairs, zero, w.data(), a2.data(), n);
          CHECK(a1 == a2);
        }
      }
    }
  }
}

TEST_CASE("requantize matches the scalar Requantizer on every backend") {
  Rng rng(24);
  std::vector<const simd::KernelTable*> all = backends();
  all.push_back(&simd::scalar_kernels());
  for (double m : {1e-9, 3e-5, 0.0123, 0.5, 0.75, 1.0, 3.7, 1e3}) {
    const auto rq = Requantizer::from_real(m);
    for (std::size_t n : {1u, 7u, 8u, 9u, 64u, 99u}) {
      std::vector<std::int32_t> acc(n);
      for (auto& v : acc) v = static_cast<std::int32_t>(rng.uniform_int(-4000000, 4000000));
      acc[0] = 0;
      for (std::int32_t zp : {-128, -5, 0, 77}) {
        std::vector<std::int8_t> want(n);
        for (std::size_t i = 0; i < n; ++i)
          want[i] = static_cast<std::int8_t>(std::clamp<std::int64_t>(zp + rq.apply(acc[i]), -128, 127));
        for (const auto* k : all) {
          std::vector<std::int8_t> got(n);
          k->requantize(acc.data(), got.data(), n, rq.multiplier, rq.shift, zp);
          INFO("m=" << m << " n=" << n << " zp=" << zp << " backend=" << simd::backend_name(k->backend));
          CHECK(got == want);
        }
      }
    }
  }
}

TEST_CASE("convolutions agree across backends") {
  Rng rng(23);
  for (const auto* k : backends()) {
    for (int trial = 0; trial < 10; ++trial) {
      const int h = static_cast<int>(rng.uniform_int(3, 12));
      const int cin = static_cast<int>(rng.uniform_int(1, 12));
      const int cout = static_cast<int>(rng.uniform_int(1, 20));
      Tensor x = oracle::random_tensor({1, h, h, cin}, rng);
      Tensor w = oracle::random_tensor({3, 3, cin, cout}, rng);
      const auto b = oracle::random_vec(static_cast<std::size_t>(cout), rng);
      const Tensor y1 = conv2d(x, w, b, 1, Padding::same, simd::scalar_kernels());
      const Tensor y2 = conv2d(x, w, b, 1, Padding::same, *k);
      for (std::size_t i = 0; i < y1.size(); ++i) CHECK(std::abs(y1.values()[i] - y2.values()[i]) <= 1e-5f);

      QuantTensor xq({1, h, h, cin}, QuantParams{0.02f, 3});
      for (auto& v : xq.values()) v = static_cast<std::int8_t>(rng.uniform_int(-128, 127));
      QuantTensor wq({3, 3, cin, cout}, QuantParams{0.01f, 0});
      for (auto& v : wq.values()) v = static_cast<std::int8_t>(rng.uniform_int(-127, 127));
      std::vector<std::int32_t> b32(static_cast<std::size_t>(cout), 17);
      const QuantParams op{0.5f, -4};
      CHECK(conv2d_int8(xq, wq, b32, op, 2, Padding::same, simd::scalar_kernels()).values() ==
            conv2d_int8(xq, wq, b32, op, 2, Padding::same, *k).values());
      QuantTensor dq({3, 3, cin, 1}, QuantParams{0.01f, 0});
      for (auto& v : dq.values()) v = static_cast<std::int8_t>(rng.uniform_int(-127, 127));
      std::vector<std::int32_t> db(static_cast<std::size_t>(cin), -9);
      CHECK(depthwise_conv2d_int8(xq, dq, db, op, 1, Padding::same, simd::scalar_kernels()).values() ==
            depthwise_conv2d_int8(xq, dq, db, op, 1, Padding::same, *k).values());
    }
  }
}
