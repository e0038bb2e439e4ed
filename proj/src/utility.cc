#include "cec/utility.h"

#include <algorithm>
#include <cmath>

#include "cec/errors.h"

namespace cec {

UtilityKind parse_utility_kind(std::string_view name) {
  if (name == "log") return UtilityKind::kLogarithmic;
  if (name == "linear") return UtilityKind::kLinear;
  if (name == "sqrt") return UtilityKind::kSquareRoot;
  if (name == "quad") return UtilityKind::kQuadratic;
  throw InvalidArgument("unknown utility family: " + std::string(name));
}

std::string to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::kLinear:
      return "linear";
    case UtilityKind::kSquareRoot:
      return "sqrt";
    case UtilityKind::kQuadratic:
      return "quad";
    case UtilityKind::kLogarithmic:
      return "log";
  }
  return "unknown";
}

UtilityOracle::UtilityOracle(UtilityFamily family, double max_rate)
    : UtilityOracle(std::move(family), max_rate, true) {}

UtilityOracle UtilityOracle::unchecked(UtilityFamily family, double max_rate) {
  return UtilityOracle(std::move(family), max_rate, false);
}

UtilityOracle::UtilityOracle(UtilityFamily family, double max_rate,
                             bool validate)
    : family_(std::move(family)), max_rate_(max_rate) {
  if (!(max_rate_ > 0.0)) throw InvalidArgument("total rate must be positive");
  if (family_.a.empty()) throw InvalidArgument("utility needs >= 1 session");
  if (family_.kind == UtilityKind::kLinear && family_.b.empty()) {
    family_.b.assign(family_.a.size(), 1.0);
  }
  if (family_.a.size() != family_.b.size()) {
    throw InvalidArgument("utility parameter arrays a_w and b_w differ in length");
  }
  for (size_t w = 0; w < family_.a.size(); ++w) {
    if (!(family_.a[w] > 0.0) || !(family_.b[w] > 0.0)) {
      throw InvalidArgument("utility parameters must be positive");
    }
    if (validate && family_.kind == UtilityKind::kQuadratic &&
        max_rate_ > family_.b[w] / (2.0 * family_.a[w])) {
      throw InvalidArgument(
          "quadratic utility not monotone on [0, lambda]: need lambda <= b/(2a)");
    }
  }
}

UtilityOracle::UtilityOracle(const UtilityOracle& other)
    : family_(other.family_),
      max_rate_(other.max_rate_),
      queries_(other.queries_.load()) {}

UtilityOracle& UtilityOracle::operator=(const UtilityOracle& other) {
  family_ = other.family_;
  max_rate_ = other.max_rate_;
  queries_.store(other.queries_.load());
  return *this;
}

UtilityOracle UtilityOracle::clone() const {
  UtilityOracle copy(*this);
  copy.reset_query_count();
  return copy;
}

double UtilityOracle::Value(int session, double rate) const {
  if (session < 0 || session >= session_count()) {
    throw InvalidArgument("utility session out of range");
  }
  // Allow round-off from the simplex renormalisation at the edges.
  const double slack = 1e-9 * (1.0 + max_rate_);
  if (!(rate >= -slack && rate <= max_rate_ + slack)) {
    throw InvalidArgument("utility rate out of domain: " + std::to_string(rate));
  }
  rate = std::clamp(rate, 0.0, max_rate_);
  const double a = family_.a[session];
  const double b = family_.b[session];
  switch (family_.kind) {
    case UtilityKind::kLinear:
      return a * rate;
    case UtilityKind::kSquareRoot:
      return a * (std::sqrt(rate + b) - std::sqrt(b));
    case UtilityKind::kQuadratic:
      return -a * rate * rate + b * rate;
    case UtilityKind::kLogarithmic:
      return a * std::log(b * rate + 1.0);
  }
  return 0.0;
}

double UtilityOracle::evaluate(int session, double rate) const {
  double u = Value(session, rate);
  queries_.fetch_add(1, std::memory_order_relaxed);
  return u;
}

double UtilityOracle::evaluate_sum(std::span<const double> rates) const {
  if (static_cast<int>(rates.size()) != session_count()) {
    throw InvalidArgument("allocation/utility dimension mismatch");
  }
  double sum = 0.0;
  for (int w = 0; w < session_count(); ++w) sum += Value(w, rates[w]);
  queries_.fetch_add(1, std::memory_order_relaxed);
  return sum;
}

AssumptionReport check_assumptions(const UtilityOracle& oracle, int grid) {
  if (grid < 3) throw InvalidArgument("assumption grid needs >= 3 points");
  AssumptionReport report;
  report.bound_est = -std::numeric_limits<double>::infinity();
  const double step = oracle.max_rate() / (grid - 1);
  for (int w = 0; w < oracle.session_count(); ++w) {
    double lipschitz = 0.0;
    double prev = oracle.evaluate(w, 0.0);
    report.bound_est = std::max(report.bound_est, prev);
    for (int k = 1; k < grid; ++k) {
      double x = k == grid - 1 ? oracle.max_rate() : k * step;
      double u = oracle.evaluate(w, x);
      double diff = u - prev;
      if (diff < -1e-12) report.monotone = false;
      lipschitz = std::max(lipschitz, std::abs(diff) / step);
      report.bound_est = std::max(report.bound_est, u);
      prev = u;
    }
    report.lipschitz_per_session.push_back(lipschitz);
    report.lipschitz_est = std::max(report.lipschitz_est, lipschitz);
  }
  return report;
}

}  // namespace cec
