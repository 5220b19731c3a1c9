#include "indemnity/problem.hpp"

#include <string>

namespace indemnity {

ProblemSpec make_problem(double W0, double pi, double rho,
                         const LossModel& loss) {
    if (!(rho >= 0.0))
        throw InvalidParameter("problem: safety loading rho must be >= 0");
    if (!(pi >= 0.0))
        throw InvalidParameter("problem: premium must be >= 0");
    ProblemSpec p;
    p.W0 = W0;
    p.pi = pi;
    p.rho = rho;
    p.Delta = loss.mean - pi / (1.0 + rho);
    p.W = W0 - (1.0 + rho) * loss.mean;
    p.W_Delta = W0 - pi;
    p.uniform_solvency = p.W - loss.M >= 0.0;
    p.worst_case_solvent = p.W_Delta - loss.M >= 0.0;
    return p;
}

}  // namespace indemnity
