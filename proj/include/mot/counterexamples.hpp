#ifndef MOT_COUNTEREXAMPLES_HPP
#define MOT_COUNTEREXAMPLES_HPP

#include <string>
#include <vector>

namespace mot {

/**
 * Built-in reproduction fixtures for the boundary cases of the theory:
 * reducible marginals, multi-marginal exercise-right divergence, failure of
 * the value identity for non-interior exercise rights or discontinuous
 * payoffs, and non-attainment of the optimal intermediate law. Each check
 * prints an expected-versus-computed line.
 */
struct CheckResult {
    std::string name;
    std::string expected;
    std::string computed;
    bool pass;
};

std::vector<CheckResult> run_counterexamples();

}  // namespace mot

#endif
