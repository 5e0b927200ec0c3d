#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subadapt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Raised for rank-deficient bases or constraint matrices.
class RankError : public Error {
 public:
  using Error::Error;
};

/// The reduced Hessian U* R U is not positive definite.
class CurvatureError : public Error {
 public:
  using Error::Error;
};

class StochasticityError : public Error {
 public:
  using Error::Error;
};

/// Unit eigenvalue count disagrees with the subspace rank.
class StructureError : public Error {
 public:
  using Error::Error;
};

class EnsembleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::size_t iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

class MaxIterationsError : public Error {
 public:
  MaxIterationsError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Non-finite or exploding iterate. Carries the iteration (and step-size when known).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration, double mu = 0.0)
      : Error(what), iteration_(iteration), mu_(mu) {}
  std::size_t iteration() const noexcept { return iteration_; }
  double mu() const noexcept { return mu_; }

 private:
  std::size_t iteration_;
  double mu_;
};

}  // namespace subadapt
