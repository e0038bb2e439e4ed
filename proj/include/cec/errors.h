#ifndef CEC_ERRORS_H
#define CEC_ERRORS_H

#include <stdexcept>
#include <string>

namespace cec {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Flow on a link left the domain of its cost function (M/M/1 with F >= C).
class CapacityExceeded : public Error {
 public:
  CapacityExceeded(int link, double flow, double capacity);

  int link() const { return link_; }
  double flow() const { return flow_; }
  double capacity() const { return capacity_; }

 private:
  int link_;
  double flow_;
  double capacity_;
};

// Graph-structural failures: disconnected generators, unreachable sessions.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown inside an iterative solver.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cec

#endif  // CEC_ERRORS_H
