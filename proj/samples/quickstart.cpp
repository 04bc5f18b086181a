// Copyright 2026 The sqbsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Builds the detection table at one squeezing intensity, then prints the
// zero-error success probability and a few error-budgeted operating points.

#include <cstdio>

#include "sqbsm/sqbsm.hpp"

int main() {
    using namespace sqbsm;

    const double r = 0.5;
    const auto params = CircuitParams::uniform(r, /*eta=*/1.0, /*n_max=*/7);
    const auto table = build_detection_table(params);
    std::printf("r = %.3f (%.2f dB), n_max = 7, %zu distinct patterns\n", r, params.squeeze[0].db(),
                table.distinct_patterns());

    const auto classes = classify(table);
    std::printf("zero-error p_s = %.4f\n", usd_success(classes));

    PsdSelector selector(classes);
    for (double budget : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const auto res = selector.select(ErrorBudget{budget});
        std::printf("pe_max = %-6g  p_s = %.4f  p_e = %.5f  alpha = %.4f  (%zu patterns admitted)\n", budget,
                    res.p_s, res.p_e, res.alpha.value_or(0.0), res.selected.size());
    }
    return 0;
}
