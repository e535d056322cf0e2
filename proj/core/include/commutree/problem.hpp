#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "commutree/geometry.hpp"

namespace commutree {

enum class ConeKind { Zero, NonnegOrthant, SecondOrder };

struct ConeFactor {
  ConeKind kind = ConeKind::NonnegOrthant;
  int size = 0;
  bool operator==(const ConeFactor&) const = default;
};

/// Ordered product of cones; row blocks of the conic constraint follow it.
class ConeSpec {
 public:
  ConeSpec() = default;
  explicit ConeSpec(std::vector<ConeFactor> factors);

  const std::vector<ConeFactor>& factors() const { return factors_; }
  int total_rows() const;
  /// Rows outside the Zero cone; number of "units" for the duality measure.
  int degree() const;
  void append(ConeFactor f);
  void append(const ConeSpec& other);
  bool operator==(const ConeSpec&) const = default;

 private:
  std::vector<ConeFactor> factors_;
};

/// Binary commutation vector delta.
class Commutation {
 public:
  Commutation() = default;
  explicit Commutation(std::vector<std::uint8_t> bits);
  static Commutation zeros(int m) { return Commutation(std::vector<std::uint8_t>(m, 0)); }
  /// Parses "0101"; "-" or "" is the length-0 commutation.
  static Commutation from_string(const std::string& s);

  int size() const { return static_cast<int>(bits_.size()); }
  std::uint8_t operator[](int i) const { return bits_[i]; }
  void set(int i, bool v) { bits_[i] = v ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  Eigen::VectorXd as_vector() const;
  std::string to_string() const;

  auto operator<=>(const Commutation&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Conic data for a fixed commutation, affine in theta:
///   min  c'x + c_theta'theta + c0
///   s.t. A_eq x = b_eq + B_eq theta
///        h + H theta - G x in K
struct ConicData {
  Eigen::VectorXd c;
  Eigen::VectorXd c_theta;
  double c0 = 0.0;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd B_eq;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::MatrixXd H;
  ConeSpec cone;

  int n() const { return static_cast<int>(c.size()); }
  int p() const { return static_cast<int>(c_theta.size()); }
  /// Empty when consistent; otherwise human-readable violations.
  std::vector<std::string> check_dimensions() const;
  bool operator==(const ConicData& o) const;
};

/// Affine-in-delta data: base data at delta = 0 plus delta columns.
///   cost += c_delta'delta,  A_eq x + A_delta delta = ...,
///   h + H theta - G x - G_delta delta in K
struct MixedEncoding {
  ConicData base;
  Eigen::VectorXd c_delta;
  Eigen::MatrixXd A_delta;
  Eigen::MatrixXd G_delta;

  ConicData substitute(const Commutation& delta) const;
};

/// Bits that must sum to exactly one.
struct OneHotGroup {
  std::vector<int> bits;
  bool operator==(const OneHotGroup&) const = default;
};

struct ScalingTransform {
  Eigen::VectorXd scale;   // theta' = scale .* (theta - offset)
  Eigen::VectorXd offset;

  static ScalingTransform identity(int p);
  Point apply(const Point& theta) const;
  Point invert(const Point& theta_scaled) const;
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& pts) const;
  bool is_identity() const;
};

/// Rewrites data in theta to data in scaled theta'.
ConicData rescale(const ConicData& d, const ScalingTransform& t);

/// (P_theta): parametric mixed-integer conic program. Immutable and safe for
/// concurrent use once built.
class ParametricProgram {
 public:
  using DataMap = std::function<ConicData(const Commutation&)>;
  using Table = std::map<Commutation, ConicData>;

  /// Explicit per-commutation table; only listed commutations are admissible.
  static ParametricProgram from_table(std::string name, int p, int m, Table table,
                                      std::vector<OneHotGroup> groups = {});
  static ParametricProgram from_mixed(std::string name, int p, int m, MixedEncoding enc,
                                      std::vector<OneHotGroup> groups = {});
  /// Black-box data map; every commutation satisfying the groups is admissible.
  static ParametricProgram from_map(std::string name, int p, int n, int m, DataMap map,
                                    std::vector<OneHotGroup> groups = {});

  const std::string& name() const { return name_; }
  int p() const { return p_; }
  int n() const { return n_; }
  int m() const { return m_; }
  const std::vector<OneHotGroup>& groups() const { return groups_; }
  const std::optional<Table>& table() const { return table_; }
  const std::optional<MixedEncoding>& mixed() const { return mixed_; }

  /// Length and structural constraints (and table membership) hold.
  bool admissible(const Commutation& delta) const;
  /// Throws InadmissibleCommutation.
  ConicData instantiate(const Commutation& delta) const;

  /// Program in scaled parameter coordinates.
  ParametricProgram rescaled(const ScalingTransform& t) const;

 private:
  ParametricProgram() = default;

  std::string name_;
  int p_ = 0;
  int n_ = 0;
  int m_ = 0;
  std::vector<OneHotGroup> groups_;
  std::optional<Table> table_;
  std::optional<MixedEncoding> mixed_;
  std::shared_ptr<const DataMap> map_;
};

/// Structural constraints satisfied (length not checked).
bool satisfies_groups(const std::vector<OneHotGroup>& groups, const Commutation& delta);

struct ScaledProblem {
  ParametricProgram program;
  Polytope theta;
  ScalingTransform transform;
};

/// Per-axis unit scaling of Theta (offset zero): max |e_i'v| over V(Theta) = 1.
ScaledProblem scale_to_unit_box(const ParametricProgram& prog, const Polytope& theta);

struct Diagnostic {
  std::string code;
  std::string message;
};

/// Dimension checks on a probe set of commutations plus structural checks.
std::vector<Diagnostic> validate(const ParametricProgram& prog);

}  // namespace commutree
