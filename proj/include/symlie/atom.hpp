#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace symlie {

// Kinds are listed in canonical order.
enum class AtomKind : std::uint8_t { Independent = 0, Jet = 1, Function = 2, Parameter = 3 };

struct AtomData {
  std::uint32_t id;
  AtomKind kind;
  std::string name;
  int order = 0;                    // jet variables
  std::vector<std::string> args;    // function atoms
  std::vector<int> multi_index;     // function atoms, one entry per argument
};

/// Interned symbol. Two atoms compare equal iff all their fields are equal;
/// the handle is a pointer into a process-wide table that is never freed.
class Atom {
 public:
  static Atom independent(std::string_view name);
  static Atom jet(std::string_view symbol, int order);
  static Atom function(std::string_view name, std::vector<std::string> args,
                       std::vector<int> multi_index);
  /// One-variable function atom `name^(order)(arg)`.
  static Atom function(std::string_view name, std::string_view arg, int order = 0);
  static Atom parameter(std::string_view name);

  AtomKind kind() const noexcept { return data_->kind; }
  const std::string& name() const noexcept { return data_->name; }
  int order() const noexcept { return data_->order; }
  const std::vector<std::string>& args() const noexcept { return data_->args; }
  const std::vector<int>& multi_index() const noexcept { return data_->multi_index; }
  std::uint32_t id() const noexcept { return data_->id; }

  bool is_independent() const noexcept { return kind() == AtomKind::Independent; }
  bool is_jet() const noexcept { return kind() == AtomKind::Jet; }
  bool is_function() const noexcept { return kind() == AtomKind::Function; }
  bool is_parameter() const noexcept { return kind() == AtomKind::Parameter; }

  /// Total derivative order of a function atom (sum of the multi-index).
  int derivative_count() const noexcept;
  /// Jet of the same symbol with a different order.
  Atom with_order(int order) const;
  /// Function atom differentiated once more in argument `arg_index`.
  Atom differentiated(std::size_t arg_index) const;
  /// Same function, undifferentiated.
  Atom base_function() const;

  /// Canonical order: independent < jets by (symbol, order) < functions by
  /// (name, multi-index, args) < parameters by name.
  bool canonical_less(const Atom& other) const;

  friend bool operator==(const Atom& a, const Atom& b) noexcept { return a.data_ == b.data_; }
  friend bool operator!=(const Atom& a, const Atom& b) noexcept { return a.data_ != b.data_; }

 private:
  explicit Atom(const AtomData* data) : data_(data) {}
  static Atom intern(AtomData&& data);

  const AtomData* data_;
};

struct AtomHash {
  std::size_t operator()(const Atom& a) const noexcept { return std::hash<std::uint32_t>{}(a.id()); }
};

/// Orders atoms by interning id; cheap, stable within a process.
struct AtomIdLess {
  bool operator()(const Atom& a, const Atom& b) const noexcept { return a.id() < b.id(); }
};

struct AtomCanonicalLess {
  bool operator()(const Atom& a, const Atom& b) const { return a.canonical_less(b); }
};

}  // namespace symlie
