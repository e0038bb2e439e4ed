#ifndef CEC_UTILITY_H
#define CEC_UTILITY_H

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cec {

enum class UtilityKind { kLinear, kSquareRoot, kQuadratic, kLogarithmic };

UtilityKind parse_utility_kind(std::string_view name);
std::string to_string(UtilityKind kind);

// One family with per-session parameters. Used only to construct oracles;
// optimizers never see it.
struct UtilityFamily {
  UtilityKind kind = UtilityKind::kLogarithmic;
  std::vector<double> a;
  std::vector<double> b;
};

// Black-box utilities u_w on [0, max_rate]. Every evaluation increments a
// query counter; clones share parameters but count separately.
class UtilityOracle {
 public:
  // Validates parameters: a_w > 0, b_w > 0 (b unused by Linear), and for
  // Quadratic max_rate <= b_w / (2 a_w) so u_w is nondecreasing on the domain.
  UtilityOracle(UtilityFamily family, double max_rate);

  // Same as above minus the Quadratic domain check; lets tests build
  // deliberately invalid oracles for check_assumptions.
  static UtilityOracle unchecked(UtilityFamily family, double max_rate);

  UtilityOracle(const UtilityOracle& other);
  UtilityOracle& operator=(const UtilityOracle& other);

  int session_count() const { return static_cast<int>(family_.a.size()); }
  double max_rate() const { return max_rate_; }

  // Throws InvalidArgument when rate is outside [0, max_rate]. One query.
  double evaluate(int session, double rate) const;

  // Sum_w u_w(rates[w]) observed as a single query.
  double evaluate_sum(std::span<const double> rates) const;

  std::uint64_t query_count() const { return queries_.load(); }
  void reset_query_count() { queries_.store(0); }

  // Fresh counter, same utilities.
  UtilityOracle clone() const;

 private:
  UtilityOracle(UtilityFamily family, double max_rate, bool validate);
  double Value(int session, double rate) const;

  UtilityFamily family_;
  double max_rate_ = 0.0;
  mutable std::atomic<std::uint64_t> queries_{0};
};

struct AssumptionReport {
  bool monotone = true;
  double lipschitz_est = 0.0;  // max over sessions
  double bound_est = 0.0;      // max sampled value over sessions
  std::vector<double> lipschitz_per_session;
};

// Samples each u_w on a uniform grid of `grid` points over [0, max_rate].
AssumptionReport check_assumptions(const UtilityOracle& oracle, int grid);

}  // namespace cec

#endif  // CEC_UTILITY_H
