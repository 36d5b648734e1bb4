#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace phs {

/// Time-dependent boundary input. Three kinds cover the scenarios of
/// interest: identically zero, a constant vector, and a constant vector that
/// drops to zero at a release time (a weight being let go).
template <typename Scalar = double>
class Signal {
 public:
  using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

  enum class Kind { Zero, Constant, StepRelease };

  Signal() = default;

  static Signal zero() { return Signal(); }

  static Signal constant(VectorX value) {
    Signal s;
    s.kind_ = Kind::Constant;
    s.value_ = std::move(value);
    return s;
  }

  /// Constant `value` for t < release_time, zero at and after release_time.
  static Signal step_release(VectorX value, Scalar release_time) {
    Signal s;
    s.kind_ = Kind::StepRelease;
    s.value_ = std::move(value);
    s.release_time_ = release_time;
    return s;
  }

  Kind kind() const { return kind_; }
  const VectorX& value() const { return value_; }
  Scalar release_time() const { return release_time_; }

  bool is_zero() const { return kind_ == Kind::Zero; }

  /// True if the signal is nonzero for some t.
  bool is_active() const {
    return kind_ != Kind::Zero && value_.size() > 0 && value_.norm() > Scalar(0);
  }

  /// Evaluate at time t; `width` is the port block width the caller expects.
  VectorX operator()(Scalar t, Eigen::Index width) const {
    switch (kind_) {
      case Kind::Zero:
        return VectorX::Zero(width);
      case Kind::Constant:
        check_width(width);
        return value_;
      case Kind::StepRelease:
        check_width(width);
        if (t < release_time_) return value_;
        return VectorX::Zero(width);
    }
    return VectorX::Zero(width);
  }

 private:
  void check_width(Eigen::Index width) const {
    if (value_.size() != width)
      throw std::invalid_argument("signal width " + std::to_string(value_.size()) +
                                  " does not match port width " + std::to_string(width));
  }

  Kind kind_ = Kind::Zero;
  VectorX value_;
  Scalar release_time_ = Scalar(0);
};

using Signald = Signal<double>;

}  // namespace phs
