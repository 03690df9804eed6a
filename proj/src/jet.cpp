#include "symlie/jet.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>

#include "symlie/error.hpp"

namespace symlie {

JetSystem::JetSystem(std::string independent_name, std::vector<std::string> dependent_names,
                     int max_order_all)
    : independent(std::move(independent_name)),
      dependents(std::move(dependent_names)),
      default_max_order(max_order_all) {}

bool JetSystem::has_dependent(const std::string& symbol) const {
  return std::find(dependents.begin(), dependents.end(), symbol) != dependents.end();
}

int JetSystem::max_order_of(const std::string& symbol) const {
  auto it = max_order.find(symbol);
  return it == max_order.end() ? default_max_order : it->second;
}

Atom JetSystem::coordinate_atom(const std::string& name) const {
  if (name == independent) return Atom::independent(name);
  if (!has_dependent(name)) throw CoordinateMismatch("unknown coordinate " + name);
  return Atom::jet(name, 0);
}

void JetSystem::validate() const {
  std::set<std::string> seen{independent};
  for (const auto& d : dependents)
    if (!seen.insert(d).second) throw std::invalid_argument("repeated jet symbol " + d);
  if (default_max_order < 0) throw std::invalid_argument("negative max order");
  for (const auto& [s, o] : max_order)
    if (o < 0) throw std::invalid_argument("negative max order for " + s);
}

namespace {

// D of a zeroth-order coordinate named `arg`, or nullopt when it is constant
// in this system.
std::optional<Expression> coordinate_shift(const std::string& arg, const JetSystem& sys) {
  if (arg == sys.independent) return Expression(1);
  if (!sys.has_dependent(arg)) return std::nullopt;
  Expression shifted(Atom::jet(arg, 1));
  if (auto it = sys.chain_factor.find(arg); it != sys.chain_factor.end())
    shifted = shifted * it->second;
  return shifted;
}

}  // namespace

Expression total_derivative(const Expression& e, const JetSystem& sys) {
  Expression result = e.differentiate(sys.independent_atom());
  for (const auto& atom : e.atoms()) {
    if (atom.is_jet()) {
      if (!sys.has_dependent(atom.name())) continue;
      if (atom.order() >= sys.max_order_of(atom.name()))
        throw OrderLimit("jet " + atom.name() + "#" + std::to_string(atom.order()) +
                         " is at the tracked max order " +
                         std::to_string(sys.max_order_of(atom.name())));
      Expression shifted(atom.with_order(atom.order() + 1));
      if (auto it = sys.chain_factor.find(atom.name()); it != sys.chain_factor.end())
        shifted = shifted * it->second;
      result += shifted * e.differentiate(atom);
    } else if (atom.is_function()) {
      Expression chain;
      for (std::size_t i = 0; i < atom.args().size(); ++i) {
        if (auto d = coordinate_shift(atom.args()[i], sys))
          chain += *d * Expression(atom.differentiated(i));
      }
      if (!chain.is_zero()) result += chain * e.differentiate(atom);
    }
  }
  return result;
}

Expression coordinate_partial(const Expression& e, const std::string& coordinate,
                              const JetSystem& sys) {
  Expression result = e.differentiate(sys.coordinate_atom(coordinate));
  for (const auto& atom : e.atoms()) {
    if (!atom.is_function()) continue;
    for (std::size_t i = 0; i < atom.args().size(); ++i) {
      if (atom.args()[i] == coordinate)
        result += Expression(atom.differentiated(i)) * e.differentiate(atom);
    }
  }
  return result;
}

// ------------------------------------------------------------ VectorField

VectorField::VectorField(JetSystem sys, Expression xi, std::vector<Expression> etas)
    : sys_(std::move(sys)),
      xi_(std::move(xi)),
      etas_(std::move(etas)),
      cache_(std::make_shared<Cache>()) {
  sys_.validate();
  if (etas_.size() != sys_.dependents.size())
    throw std::invalid_argument("vector field has " + std::to_string(etas_.size()) +
                                " dependent coefficients for " +
                                std::to_string(sys_.dependents.size()) + " symbols");
}

VectorField::VectorField(JetSystem sys)
    : VectorField(sys, Expression(), std::vector<Expression>(sys.dependents.size())) {}

const Expression& VectorField::coefficient(const std::string& coordinate) const {
  if (coordinate == sys_.independent) return xi_;
  for (std::size_t i = 0; i < sys_.dependents.size(); ++i)
    if (sys_.dependents[i] == coordinate) return etas_[i];
  throw CoordinateMismatch("vector field has no coordinate " + coordinate);
}

std::vector<std::string> VectorField::coordinates() const {
  std::vector<std::string> out{sys_.independent};
  out.insert(out.end(), sys_.dependents.begin(), sys_.dependents.end());
  return out;
}

Expression VectorField::prolonged(const std::string& symbol, int order) const {
  if (order < 0) throw std::invalid_argument("negative prolongation order");
  if (!sys_.has_dependent(symbol)) throw CoordinateMismatch("vector field has no symbol " + symbol);
  if (order == 0) return coefficient(symbol);
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->values.find({symbol, order});
    if (it != cache_->values.end()) return it->second;
  }
  const Expression previous = prolonged(symbol, order - 1);
  Expression dxi;
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->values.find({"", 1});
    if (it != cache_->values.end()) dxi = it->second;
  }
  if (dxi.is_zero() && !xi_.is_zero()) {
    dxi = total_derivative(xi_, sys_);
    std::lock_guard lock(cache_->mutex);
    cache_->values.try_emplace({"", 1}, dxi);
  }
  Expression value =
      total_derivative(previous, sys_) - Expression(Atom::jet(symbol, order)) * dxi;
  std::lock_guard lock(cache_->mutex);
  return cache_->values.try_emplace({symbol, order}, std::move(value)).first->second;
}

Expression VectorField::apply(const Expression& e) const {
  Expression result;
  for (const auto& c : coordinates()) {
    const Expression& k = coefficient(c);
    if (k.is_zero()) continue;
    Expression d = coordinate_partial(e, c, sys_);
    if (!d.is_zero()) result += k * d;
  }
  return result;
}

Expression VectorField::apply_prolonged(const Expression& e) const {
  Expression result = apply(e);
  for (const auto& atom : e.atoms()) {
    if (!atom.is_jet() || atom.order() == 0 || !sys_.has_dependent(atom.name())) continue;
    Expression phi = prolonged(atom.name(), atom.order());
    if (!phi.is_zero()) result += phi * e.differentiate(atom);
  }
  return result;
}

void VectorField::require_same_coordinates(const VectorField& other) const {
  if (sys_.independent != other.sys_.independent || sys_.dependents != other.sys_.dependents)
    throw CoordinateMismatch("vector fields live on different coordinate systems");
}

VectorField VectorField::operator+(const VectorField& other) const {
  require_same_coordinates(other);
  std::vector<Expression> etas(etas_.size());
  for (std::size_t i = 0; i < etas_.size(); ++i) etas[i] = etas_[i] + other.etas_[i];
  return VectorField(sys_, xi_ + other.xi_, std::move(etas));
}

VectorField VectorField::operator-(const VectorField& other) const {
  return *this + other.scaled(Expression(-1));
}

VectorField VectorField::scaled(const Expression& factor) const {
  std::vector<Expression> etas(etas_.size());
  for (std::size_t i = 0; i < etas_.size(); ++i) etas[i] = etas_[i] * factor;
  return VectorField(sys_, xi_ * factor, std::move(etas));
}

VectorField VectorField::substitute(const Bindings& bindings) const {
  std::vector<Expression> etas(etas_.size());
  for (std::size_t i = 0; i < etas_.size(); ++i) etas[i] = etas_[i].substitute(bindings);
  return VectorField(sys_, xi_.substitute(bindings), std::move(etas));
}

bool VectorField::is_zero() const {
  if (!xi_.is_zero()) return false;
  return std::all_of(etas_.begin(), etas_.end(), [](const Expression& e) { return e.is_zero(); });
}

bool operator==(const VectorField& a, const VectorField& b) {
  if (a.sys_.independent != b.sys_.independent || a.sys_.dependents != b.sys_.dependents)
    return false;
  if (a.xi_ != b.xi_) return false;
  for (std::size_t i = 0; i < a.etas_.size(); ++i)
    if (a.etas_[i] != b.etas_[i]) return false;
  return true;
}

VectorField prolong(const VectorField& field, const std::map<std::string, int>& orders) {
  for (const auto& [symbol, order] : orders)
    for (int k = 1; k <= order; ++k) (void)field.prolonged(symbol, k);
  return field;
}

// ----------------------------------------------------------------- binding

namespace {

void check_concrete(const Expression& concrete, const std::string& independent) {
  for (const auto& a : concrete.atoms()) {
    if (a.is_jet() || a.is_function())
      throw InvalidBinding("concrete function may not contain the atom " + a.name());
    if (a.is_independent() && a.name() != independent)
      throw InvalidBinding("concrete function depends on " + a.name() + ", expected " +
                           independent);
  }
}

template <typename MakeAtom>
Bindings bind_derivatives(const Expression& concrete, int max_order,
                          const std::string& independent, MakeAtom make_atom) {
  if (max_order < 0) throw InvalidBinding("negative binding order");
  check_concrete(concrete, independent);
  Bindings out;
  Expression current = concrete;
  const Atom var = Atom::independent(independent);
  for (int k = 0; k <= max_order; ++k) {
    out.emplace(make_atom(k), current);
    current = current.differentiate(var);
  }
  return out;
}

}  // namespace

Bindings bind_function(const std::string& name, const Expression& concrete, int max_order,
                       const std::string& independent) {
  return bind_derivatives(concrete, max_order, independent,
                          [&](int k) { return Atom::function(name, independent, k); });
}

Bindings bind_jet(const std::string& symbol, const Expression& concrete, int max_order,
                  const std::string& independent) {
  return bind_derivatives(concrete, max_order, independent,
                          [&](int k) { return Atom::jet(symbol, k); });
}

Bindings bind_partials(const std::set<Atom, AtomIdLess>& atoms, const std::string& name,
                       const Expression& concrete, const JetSystem& sys) {
  Bindings out;
  std::map<std::vector<int>, Expression> partials;
  for (const auto& atom : atoms) {
    if (!atom.is_function() || atom.name() != name) continue;
    const auto& index = atom.multi_index();
    auto it = partials.find(index);
    if (it == partials.end()) {
      // Build from the nearest lower index already computed, one slot at a time.
      std::vector<int> current(index.size(), 0);
      Expression value = concrete;
      for (std::size_t i = 0; i < index.size(); ++i) {
        for (int k = 0; k < index[i]; ++k) {
          ++current[i];
          if (auto hit = partials.find(current); hit != partials.end()) {
            value = hit->second;
          } else {
            value = coordinate_partial(value, atom.args()[i], sys);
            partials.emplace(current, value);
          }
        }
      }
      it = partials.emplace(index, value).first;
    }
    out.emplace(atom, it->second);
  }
  return out;
}

}  // namespace symlie
