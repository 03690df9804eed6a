#include "symlie/atom.hpp"

#include <deque>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace symlie {

namespace {

struct AtomTable {
  std::mutex mutex;
  std::deque<AtomData> storage;
  std::unordered_map<std::string, const AtomData*> index;
};

AtomTable& table() {
  static AtomTable t;
  return t;
}

std::string key_of(const AtomData& d) {
  std::string key;
  key.push_back(static_cast<char>('0' + static_cast<int>(d.kind)));
  key += '|';
  key += d.name;
  key += '|';
  key += std::to_string(d.order);
  for (const auto& a : d.args) {
    key += '|';
    key += a;
  }
  key += '#';
  for (int m : d.multi_index) {
    key += std::to_string(m);
    key += ',';
  }
  return key;
}

}  // namespace

Atom Atom::intern(AtomData&& data) {
  auto& t = table();
  std::string key = key_of(data);
  std::lock_guard lock(t.mutex);
  if (auto it = t.index.find(key); it != t.index.end()) return Atom(it->second);
  data.id = static_cast<std::uint32_t>(t.storage.size());
  t.storage.push_back(std::move(data));
  const AtomData* p = &t.storage.back();
  t.index.emplace(std::move(key), p);
  return Atom(p);
}

Atom Atom::independent(std::string_view name) {
  return intern(AtomData{0, AtomKind::Independent, std::string(name), 0, {}, {}});
}

Atom Atom::jet(std::string_view symbol, int order) {
  if (order < 0) throw std::invalid_argument("negative jet order for " + std::string(symbol));
  return intern(AtomData{0, AtomKind::Jet, std::string(symbol), order, {}, {}});
}

Atom Atom::function(std::string_view name, std::vector<std::string> args,
                    std::vector<int> multi_index) {
  if (args.size() != multi_index.size())
    throw std::invalid_argument("multi-index length differs from argument count for " +
                                std::string(name));
  for (int m : multi_index)
    if (m < 0) throw std::invalid_argument("negative derivative index for " + std::string(name));
  return intern(AtomData{0, AtomKind::Function, std::string(name), 0, std::move(args),
                         std::move(multi_index)});
}

Atom Atom::function(std::string_view name, std::string_view arg, int order) {
  return function(name, std::vector<std::string>{std::string(arg)}, std::vector<int>{order});
}

Atom Atom::parameter(std::string_view name) {
  return intern(AtomData{0, AtomKind::Parameter, std::string(name), 0, {}, {}});
}

int Atom::derivative_count() const noexcept {
  return std::accumulate(data_->multi_index.begin(), data_->multi_index.end(), 0);
}

Atom Atom::with_order(int order) const {
  if (!is_jet()) throw std::logic_error("with_order on non-jet atom " + name());
  return jet(name(), order);
}

Atom Atom::differentiated(std::size_t arg_index) const {
  if (!is_function() || arg_index >= args().size())
    throw std::logic_error("cannot differentiate atom " + name());
  auto mi = multi_index();
  ++mi[arg_index];
  return function(name(), args(), std::move(mi));
}

Atom Atom::base_function() const {
  if (!is_function()) throw std::logic_error("base_function on non-function atom " + name());
  return function(name(), args(), std::vector<int>(args().size(), 0));
}

bool Atom::canonical_less(const Atom& other) const {
  if (data_ == other.data_) return false;
  const AtomData& a = *data_;
  const AtomData& b = *other.data_;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.name != b.name) return a.name < b.name;
  if (a.order != b.order) return a.order < b.order;
  if (a.multi_index != b.multi_index) return a.multi_index < b.multi_index;
  return a.args < b.args;
}

}  // namespace symlie
