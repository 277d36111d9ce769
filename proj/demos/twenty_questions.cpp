// Twenty questions over 16 elements: a truthful oracle and a lazy one that
// never commits to an element produce the same answer statistics.

#include <cstdio>

#include "scorelab/discretegame/game.hpp"

int main() {
    using namespace scorelab;
    const auto universe = balanced_universe(4);
    const auto rec = play_oracle(universe, std::nullopt, OraclePolicy::lazy_random, 2024);
    for (const auto& s : rec.steps)
        std::printf("q%zu: answer %c  %zu -> %zu candidates  %.3f bits\n", s.step, s.answer, s.n_before, s.n_after,
                    s.delta_h_bits);
    std::printf("expected information: %.3f bits\n", expected_information_bits(universe));
    std::printf("TV(truthful, lazy)  = %.4f\n", verify_policy_equivalence(universe, 50000, 1));
    std::printf("TV(truthful, biased) = %.4f\n",
                verify_policy_equivalence(universe, 50000, 1, OraclePolicy::biased));
}
