// Copyright 2026 The dlgctx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Times the parallel top-n evaluator against the serial reference on a
// synthetic chain corpus.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include "dlgctx/predictor.hpp"
#include "oracles.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
  const std::size_t dialogues = argc > 1 ? std::stoul(argv[1]) : 2000;
  const std::size_t length = argc > 2 ? std::stoul(argv[2]) : 25;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

  const auto chain = dlgctx::testsupport::separated_chain();
  const auto train = dlgctx::testsupport::sample_corpus(chain, dialogues, length, 1);
  const auto test = dlgctx::testsupport::sample_corpus(chain, dialogues, length, 2);
  const auto model = dlgctx::NGramModel::train(train);

  auto time = [&](auto&& fn) {
    double best = 1e300;
    double rate = 0.0;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      rate = fn();
      const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
      best = std::min(best, dt.count());
    }
    return std::pair{best, rate};
  };

  const auto [serial_ms, serial_rate] = time([&] { return dlgctx::evaluate_topn_serial(model, test, 3); });
  const auto [parallel_ms, parallel_rate] = time([&] { return dlgctx::evaluate_topn(model, test, 3); });

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::cout << "utterances " << test.utterance_count() << ", threads " << threads << "\n";
  std::cout << "serial   " << serial_ms << " ms  rate " << serial_rate << "\n";
  std::cout << "parallel " << parallel_ms << " ms  rate " << parallel_rate << "\n";
  std::cout << "speedup  " << serial_ms / parallel_ms << "\n";
  return serial_rate == parallel_rate ? 0 : 1;
}
