#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "indemnity/loss_model.hpp"

namespace indemnity {

struct CurveSample {
    double x = 0.0;
    double indemnity = 0.0;
    double retention = 0.0;
    double quantile_z = 0.0;  // F(x)
};

// Loss-space view of a contract: a uniform grid over [0, M] with the
// contract's exact breakpoints spliced in, so the kinks land on sample points.
struct ContractCurve {
    Contract contract;
    std::vector<CurveSample> samples;
};

// n_samples uniform points (endpoints included) plus the breakpoints.
ContractCurve build_curve(const LossModel& loss, const Contract& contract,
                          int n_samples);

// Fixed columns x,indemnity,retention,quantile_z; header row; 12 significant
// digits; LF line endings. Byte-deterministic for identical inputs.
void write_curve_csv(std::ostream& out, const ContractCurve& curve);

// The same number formatting the CSV uses, for any writer that must match it.
std::string format_number(double v);

}  // namespace indemnity
