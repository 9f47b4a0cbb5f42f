#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "gradiometry/errors.hpp"
#include "gradiometry/moment_curve.hpp"

namespace gradiometry::runner {

struct CheckRecord {
  std::string name;
  double max_deviation = 0.0;
  double max_relative = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<CheckRecord> checks;

  /// Records a check that passes iff deviation <= tolerance (NaN fails).
  CheckRecord& add(std::string name, double deviation, double tolerance, double relative = 0.0) {
    checks.push_back({std::move(name), deviation, relative, tolerance, deviation <= tolerance});
    return checks.back();
  }

  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
  }

  void print(std::ostream& os) const {
    char buf[256];
    for (const CheckRecord& c : checks) {
      std::snprintf(buf, sizeof buf, "%-4s %-44s dev=%.3e rel=%.3e tol=%.1e\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.max_deviation, c.max_relative, c.tolerance);
      os << buf;
    }
    os << (passed() ? "overall: PASS\n" : "overall: FAIL\n");
  }
};

/// Pointwise max-absolute and max-relative deviation per column. Thetas must
/// match to 1e-12; the flags column must match exactly.
inline ValidationReport compare_curves(const MomentCurve& a, const MomentCurve& b, double tolerance) {
  if (a.size() != b.size()) {
    throw DomainError("curves have different grids (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + " points)");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.thetas[i] - b.thetas[i]) > 1e-12 * (1.0 + std::abs(a.thetas[i]))) {
      throw DomainError("curves have different grids at index " + std::to_string(i));
    }
  }
  ValidationReport report;
  auto column = [&](const std::string& name, const std::vector<double>& x, const std::vector<double>& y) {
    double dev = 0.0;
    double rel = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = std::abs(x[i] - y[i]);
      dev = std::max(dev, d);
      const double mag = std::max(std::abs(x[i]), std::abs(y[i]));
      if (mag > 0.0) rel = std::max(rel, d / mag);
      if (std::isnan(d)) dev = rel = d;
    }
    report.add(name, dev, tolerance, rel);
  };
  column("jx2", a.jx2, b.jx2);
  column("jx4", a.jx4, b.jx4);
  column("var_jx2", a.var_jx2, b.var_jx2);
  column("inv_precision", a.inv_precision, b.inv_precision);
  if (a.inv_precision_gaussian && b.inv_precision_gaussian) {
    column("inv_precision_gaussian", *a.inv_precision_gaussian, *b.inv_precision_gaussian);
  }
  return report;
}

}  // namespace gradiometry::runner
