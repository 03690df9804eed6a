#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "symlie/expression.hpp"

namespace symlie {

/// One independent variable and an ordered list of dependent symbols whose
/// derivatives are tracked as jet atoms `u#k`.
struct JetSystem {
  std::string independent = "x";
  std::vector<std::string> dependents;
  /// Highest jet order tracked per symbol; symbols not listed use
  /// `default_max_order`.
  std::map<std::string, int> max_order;
  int default_max_order = 10;
  /// Dependent symbols that are functions of another variable s = s(independent);
  /// the total derivative multiplies their shifted jets by ds/d(independent).
  std::map<std::string, Expression> chain_factor;

  JetSystem() = default;
  JetSystem(std::string independent_name, std::vector<std::string> dependent_names,
            int max_order_all = 10);

  bool has_dependent(const std::string& symbol) const;
  int max_order_of(const std::string& symbol) const;
  Atom independent_atom() const { return Atom::independent(independent); }
  /// Coordinate atom: the independent variable or a zeroth-order jet.
  Atom coordinate_atom(const std::string& name) const;
  /// Throws std::invalid_argument on repeated names or negative orders.
  void validate() const;
};

/// D_x e: explicit x-dependence, jet shifts u_k -> u_{k+1}, and the chain rule
/// through function atoms whose arguments are coordinates of `sys`.
/// Throws OrderLimit when a jet atom is already at its symbol's max order.
Expression total_derivative(const Expression& e, const JetSystem& sys);

/// Partial derivative in a coordinate (independent variable or zeroth-order
/// jet), differentiating through function atoms that take it as argument.
Expression coordinate_partial(const Expression& e, const std::string& coordinate,
                              const JetSystem& sys);

/// Point vector field xi d_x + sum_u eta_u d_u on a jet system, with a
/// write-once cache of prolonged coefficients shared between copies.
class VectorField {
 public:
  VectorField(JetSystem sys, Expression xi, std::vector<Expression> etas);
  /// Zero field.
  explicit VectorField(JetSystem sys);

  const JetSystem& system() const noexcept { return sys_; }
  const Expression& xi() const noexcept { return xi_; }
  const std::vector<Expression>& etas() const noexcept { return etas_; }
  /// Coefficient for a coordinate name (the independent variable gives xi).
  const Expression& coefficient(const std::string& coordinate) const;
  std::vector<std::string> coordinates() const;

  /// phi_u^(k); order 0 is the base coefficient.
  Expression prolonged(const std::string& symbol, int order) const;

  /// X(e) for the point field (no prolongation), chain rule through function atoms.
  Expression apply(const Expression& e) const;
  /// pr X(e), prolonging to whatever jet orders occur in e.
  Expression apply_prolonged(const Expression& e) const;

  VectorField operator+(const VectorField& other) const;
  VectorField operator-(const VectorField& other) const;
  VectorField scaled(const Expression& factor) const;
  VectorField substitute(const Bindings& bindings) const;
  bool is_zero() const;

  friend bool operator==(const VectorField& a, const VectorField& b);
  friend bool operator!=(const VectorField& a, const VectorField& b) { return !(a == b); }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<std::pair<std::string, int>, Expression> values;
  };

  void require_same_coordinates(const VectorField& other) const;

  JetSystem sys_;
  Expression xi_;
  std::vector<Expression> etas_;
  std::shared_ptr<Cache> cache_;
};

/// Returns X with prolonged coefficients up to the requested order per symbol
/// attached (computed with phi^(k+1) = D phi^(k) - u_{k+1} D xi).
VectorField prolong(const VectorField& field, const std::map<std::string, int>& orders);

/// Bindings name, name', ..., name^(max_order) for a one-variable function
/// atom of `independent`, each the exact derivative of the previous.
/// Throws InvalidBinding when `concrete` mentions jets or function atoms.
Bindings bind_function(const std::string& name, const Expression& concrete, int max_order,
                       const std::string& independent = "x");

/// Same for a dependent symbol: u#0 .. u#max_order.
Bindings bind_jet(const std::string& symbol, const Expression& concrete, int max_order,
                  const std::string& independent = "x");

/// Bindings for every atom of function `name` found in `atoms`, each the
/// matching partial derivative of `concrete` (taken with coordinate_partial,
/// so the arguments must be coordinates of `sys`).
Bindings bind_partials(const std::set<Atom, AtomIdLess>& atoms, const std::string& name,
                       const Expression& concrete, const JetSystem& sys);

}  // namespace symlie
