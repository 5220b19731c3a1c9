#include "indemnity/curve.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace indemnity {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

ContractCurve build_curve(const LossModel& loss, const Contract& contract,
                          int n_samples) {
    if (n_samples < 2)
        throw InvalidParameter("build_curve: need at least 2 samples");
    ContractCurve curve;
    curve.contract = contract;

    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(n_samples) + 2);
    for (int i = 0; i < n_samples; ++i)
        xs.push_back(loss.M * static_cast<double>(i) / (n_samples - 1));
    const auto [x_lo, x_hi] = loss_breakpoints(contract, loss);
    for (double bp : {x_lo, x_hi})
        if (bp > 0.0 && bp < loss.M) xs.push_back(bp);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    curve.samples.reserve(xs.size());
    for (double x : xs) {
        CurveSample s;
        s.x = x;
        s.indemnity = indemnity_at(contract, loss, x);
        s.retention = x - s.indemnity;
        s.quantile_z = loss.cdf(x);
        curve.samples.push_back(s);
    }
    return curve;
}

void write_curve_csv(std::ostream& out, const ContractCurve& curve) {
    out << "x,indemnity,retention,quantile_z\n";
    for (const CurveSample& s : curve.samples) {
        out << format_number(s.x) << ',' << format_number(s.indemnity) << ','
            << format_number(s.retention) << ',' << format_number(s.quantile_z)
            << '\n';
    }
}

}  // namespace indemnity
