#ifndef WSGD_TYPES_HPP
#define WSGD_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wsgd {

template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Real = double;
using VecX = Vec<Real>;
using MatX = Mat<Real>;

struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when an SGD iterate picks up a non-finite coordinate. stream_id
/// identifies the failing replication when the run came from a Monte-Carlo
/// harness (-1 otherwise).
struct divergence_error : std::runtime_error {
  long long step;
  double theta_norm;
  long long stream_id;
  divergence_error(long long t, double norm, long long stream = -1)
      : std::runtime_error("divergent iterate at step " + std::to_string(t) +
                           " (||theta|| = " + std::to_string(norm) +
                           (stream >= 0 ? ", stream " + std::to_string(stream) : "") + ")"),
        step(t),
        theta_norm(norm),
        stream_id(stream) {}
};

/// Raised when a per-arm curvature block is singular (arm starved of data).
struct rank_error : std::runtime_error {
  int arm;
  explicit rank_error(int a)
      : std::runtime_error("singular curvature block for arm " + std::to_string(a) +
                           "; the arm received too few updates"),
        arm(a) {}
};

struct parse_error : io_error {
  long long line;
  parse_error(long long line_no, const std::string& msg)
      : io_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

/// Index of one arm in a finite action set.
struct ArmIndex {
  int value = 0;
};

/// Concatenated per-arm parameter vector, arm a owning the contiguous
/// coordinates [a*p, (a+1)*p).
template <typename T>
class Params {
 public:
  Params() = default;

  Params(Vec<T> values, int arms) : v_(std::move(values)), arms_(arms) {
    if (arms_ < 2) throw config_error("Params: need at least 2 arms");
    if (v_.size() % arms_ != 0)
      throw config_error("Params: length " + std::to_string(v_.size()) +
                         " not divisible by arm count " + std::to_string(arms_));
  }

  static Params Zero(int arm_dim, int arms) {
    return Params(Vec<T>::Zero(static_cast<Eigen::Index>(arm_dim) * arms), arms);
  }

  int arms() const { return arms_; }
  int dim() const { return static_cast<int>(v_.size()); }
  int arm_dim() const { return static_cast<int>(v_.size()) / arms_; }

  void check_arm(ArmIndex a) const {
    if (a.value < 0 || a.value >= arms_)
      throw config_error("arm index " + std::to_string(a.value) + " out of range [0, " +
                         std::to_string(arms_) + ")");
  }

  /// Mutable view of arm a's coordinates; writes land exactly there.
  auto arm(ArmIndex a) {
    check_arm(a);
    return v_.segment(static_cast<Eigen::Index>(a.value) * arm_dim(), arm_dim());
  }

  auto arm(ArmIndex a) const {
    check_arm(a);
    return v_.segment(static_cast<Eigen::Index>(a.value) * arm_dim(), arm_dim());
  }

  const Vec<T>& vec() const { return v_; }
  Vec<T>& vec() { return v_; }

 private:
  Vec<T> v_;
  int arms_ = 2;
};

/// One adaptively collected data point plus the probability with which the
/// realized action was drawn.
template <typename T>
struct Observation {
  Vec<T> x;
  ArmIndex action;
  T reward = T(0);
  T action_prob = T(0);
};

/// Step sizes eta * max(t, meltdown)^(-alpha); constant before the meltdown
/// step, then polynomially decaying.
template <typename T>
struct StepSchedule {
  T eta0 = T(0.5);
  T alpha = T(0.8);
  long long meltdown = 300;

  T step(long long t) const {
    const T base = static_cast<T>(t < meltdown ? meltdown : t);
    return eta0 * std::pow(base, -alpha);
  }

  void validate() const {
    if (!(eta0 > T(0))) throw config_error("eta0 must be > 0");
    if (!(alpha > T(0.5) && alpha < T(1))) throw config_error("alpha must lie in (0.5, 1)");
    if (meltdown < 1) throw config_error("meltdown must be a positive integer");
  }
};

template <typename T>
T step_size(const StepSchedule<T>& schedule, long long t) {
  return schedule.step(t);
}

/// Keys one reproducible pseudo-random stream. Equal (master_seed, stream_id)
/// pairs replay bit-identical sequences; distinct stream ids are independent.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

}  // namespace wsgd

#endif  // WSGD_TYPES_HPP
