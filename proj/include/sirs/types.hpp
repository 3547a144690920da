#pragma once

#include <Eigen/Dense>

namespace sirs {

template <typename Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar> using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

/// Compartment state (S, I_a, I_s). The recovered class is implicit:
/// R = N - S - I_a - I_s.
template <typename Scalar> using State = Vec3<Scalar>;

enum class Season { Low, High };

inline const char* season_name(Season s) { return s == Season::Low ? "low" : "high"; }

/// Season of a time point together with its half-open interval [t_begin, t_end).
template <typename Scalar = double>
struct SeasonLabel {
  Season which;
  Scalar t_begin;
  Scalar t_end;
};

}  // namespace sirs
