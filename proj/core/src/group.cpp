#include "horolab/group.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <utility>

#include "horolab/errors.hpp"
#include "horolab/random.hpp"

namespace horolab {

using Code = std::vector<std::int32_t>;

//---------------------------------------------------------------------------//
// GroupSpec
//---------------------------------------------------------------------------//

GroupSpec GroupSpec::free(int rank) {
  if (rank < 1) throw InputError("free group rank must be >= 1");
  return {GroupKind::kFree, rank, {}};
}

GroupSpec GroupSpec::cyclic(int order) {
  if (order < 2) throw InputError("cyclic group order must be >= 2");
  return {GroupKind::kCyclic, order, {}};
}

GroupSpec GroupSpec::lattice(int dim) {
  if (dim < 1) throw InputError("lattice dimension must be >= 1");
  return {GroupKind::kLattice, dim, {}};
}

GroupSpec GroupSpec::free_product(std::vector<GroupSpec> factors) {
  if (factors.empty()) throw InputError("free product needs at least one factor");
  return {GroupKind::kFreeProduct, static_cast<int>(factors.size()), std::move(factors)};
}

GroupSpec GroupSpec::direct_product(std::vector<GroupSpec> factors) {
  if (factors.empty()) throw InputError("direct product needs at least one factor");
  return {GroupKind::kDirectProduct, static_cast<int>(factors.size()), std::move(factors)};
}

namespace {

int required_int(const nlohmann::json& doc, const char* field) {
  if (!doc.contains(field) || !doc[field].is_number_integer()) {
    throw InputError(std::string("group spec: missing integer field '") + field + "'");
  }
  return doc[field].get<int>();
}

std::vector<GroupSpec> parse_factors(const nlohmann::json& doc) {
  if (!doc.contains("factors") || !doc["factors"].is_array()) {
    throw InputError("group spec: product kinds need a 'factors' array");
  }
  std::vector<GroupSpec> out;
  for (const auto& f : doc["factors"]) out.push_back(GroupSpec::from_json(f));
  return out;
}

}  // namespace

GroupSpec GroupSpec::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw InputError("group spec must be an object with a string 'kind'");
  }
  const auto kind = doc["kind"].get<std::string>();
  if (kind == "free") return free(required_int(doc, "rank"));
  if (kind == "cyclic") return cyclic(required_int(doc, "order"));
  if (kind == "integer_lattice" || kind == "lattice") return lattice(required_int(doc, "dim"));
  if (kind == "free_product") return free_product(parse_factors(doc));
  if (kind == "direct_product") return direct_product(parse_factors(doc));
  throw InputError("group spec: unknown kind '" + kind + "'");
}

nlohmann::json GroupSpec::to_json() const {
  nlohmann::json doc;
  switch (kind) {
    case GroupKind::kFree:
      doc = {{"kind", "free"}, {"rank", param}};
      break;
    case GroupKind::kCyclic:
      doc = {{"kind", "cyclic"}, {"order", param}};
      break;
    case GroupKind::kLattice:
      doc = {{"kind", "integer_lattice"}, {"dim", param}};
      break;
    case GroupKind::kFreeProduct:
    case GroupKind::kDirectProduct: {
      doc["kind"] = kind == GroupKind::kFreeProduct ? "free_product" : "direct_product";
      auto arr = nlohmann::json::array();
      for (const auto& f : factors) arr.push_back(f.to_json());
      doc["factors"] = arr;
      break;
    }
  }
  return doc;
}

std::string GroupSpec::name() const {
  switch (kind) {
    case GroupKind::kFree:
      return "F" + std::to_string(param);
    case GroupKind::kCyclic:
      return "Z/" + std::to_string(param);
    case GroupKind::kLattice:
      return param == 1 ? std::string("Z") : "Z^" + std::to_string(param);
    case GroupKind::kFreeProduct:
    case GroupKind::kDirectProduct: {
      const char* sep = kind == GroupKind::kFreeProduct ? " * " : " x ";
      std::string out = "(";
      for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += sep;
        out += factors[i].name();
      }
      return out + ")";
    }
  }
  return "?";
}

std::uint64_t digest(const Element& e) {
  std::uint64_t h = mix64(e.code.size() + 0x243f6a8885a308d3ull);
  for (auto v : e.code) h = combine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
  return h;
}

//---------------------------------------------------------------------------//
// Normal-form backends
//---------------------------------------------------------------------------//

struct Group::Node {
  std::vector<std::string> labels;
  std::vector<int> inverse;

  virtual ~Node() = default;
  virtual Code identity() const { return {}; }
  virtual Code gen(int i) const = 0;
  virtual Code mul(const Code& a, const Code& b) const = 0;
  virtual Code inv(const Code& a) const = 0;
  virtual int len(const Code& a) const = 0;
  virtual void spell(const Code& a, Word& out) const = 0;
  virtual std::optional<double> growth_rate() const = 0;
  virtual bool first_infinite() const = 0;

  int gens() const { return static_cast<int>(labels.size()); }
};

namespace {

std::unique_ptr<Group::Node> make_node(const GroupSpec& spec);

// Reduced words; letter +(i+1) is generator i, -(i+1) its inverse.
struct FreeNode final : Group::Node {
  int rank;

  explicit FreeNode(int k) : rank(k) {
    static const std::string alphabet = "abcdfghijklmnopqrsuvwxyz";
    for (int i = 0; i < k; ++i) {
      std::string l = k <= static_cast<int>(alphabet.size()) ? std::string(1, alphabet[i])
                                                             : "a" + std::to_string(i + 1);
      std::string u = l;
      u[0] = static_cast<char>(std::toupper(u[0]));
      labels.push_back(l);
      labels.push_back(u);
      inverse.push_back(2 * i + 1);
      inverse.push_back(2 * i);
    }
  }

  Code gen(int i) const override { return {i % 2 == 0 ? i / 2 + 1 : -(i / 2 + 1)}; }

  Code mul(const Code& a, const Code& b) const override {
    Code out = a;
    for (auto l : b) {
      if (!out.empty() && out.back() == -l) {
        out.pop_back();
      } else {
        out.push_back(l);
      }
    }
    return out;
  }

  Code inv(const Code& a) const override {
    Code out(a.rbegin(), a.rend());
    for (auto& l : out) l = -l;
    return out;
  }

  int len(const Code& a) const override { return static_cast<int>(a.size()); }

  void spell(const Code& a, Word& out) const override {
    for (auto l : a) out.push_back(l > 0 ? 2 * (l - 1) : 2 * (-l - 1) + 1);
  }

  std::optional<double> growth_rate() const override { return 2.0 * rank - 1.0; }
  bool first_infinite() const override { return true; }
};

// Residue r in [0, q).
struct CyclicNode final : Group::Node {
  int order;

  explicit CyclicNode(int q) : order(q) {
    labels.push_back("t");
    if (q == 2) {
      inverse = {0};
    } else {
      labels.push_back("T");
      inverse = {1, 0};
    }
  }

  Code identity() const override { return {0}; }
  Code gen(int i) const override { return {i == 0 ? 1 : order - 1}; }
  Code mul(const Code& a, const Code& b) const override { return {(a[0] + b[0]) % order}; }
  Code inv(const Code& a) const override { return {(order - a[0]) % order}; }
  int len(const Code& a) const override { return std::min(a[0], order - a[0]); }

  void spell(const Code& a, Word& out) const override {
    const int r = a[0];
    if (r <= order - r) {
      out.insert(out.end(), static_cast<std::size_t>(r), 0);
    } else {
      out.insert(out.end(), static_cast<std::size_t>(order - r), 1);
    }
  }

  std::optional<double> growth_rate() const override { return 1.0; }
  bool first_infinite() const override { return false; }
};

// Coordinate vectors.
struct LatticeNode final : Group::Node {
  int dim;

  explicit LatticeNode(int d) : dim(d) {
    static const std::string axes = "xyzw";
    for (int i = 0; i < d; ++i) {
      std::string l = d <= 4 ? std::string(1, axes[i]) : "x" + std::to_string(i + 1);
      std::string u = l;
      u[0] = static_cast<char>(std::toupper(u[0]));
      labels.push_back(l);
      labels.push_back(u);
      inverse.push_back(2 * i + 1);
      inverse.push_back(2 * i);
    }
  }

  Code identity() const override { return Code(static_cast<std::size_t>(dim), 0); }

  Code gen(int i) const override {
    Code c = identity();
    c[static_cast<std::size_t>(i / 2)] = i % 2 == 0 ? 1 : -1;
    return c;
  }

  Code mul(const Code& a, const Code& b) const override {
    Code out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
  }

  Code inv(const Code& a) const override {
    Code out = a;
    for (auto& v : out) v = -v;
    return out;
  }

  int len(const Code& a) const override {
    int s = 0;
    for (auto v : a) s += std::abs(v);
    return s;
  }

  void spell(const Code& a, Word& out) const override {
    for (int i = 0; i < dim; ++i) {
      const int v = a[static_cast<std::size_t>(i)];
      out.insert(out.end(), static_cast<std::size_t>(std::abs(v)), v >= 0 ? 2 * i : 2 * i + 1);
    }
  }

  std::optional<double> growth_rate() const override { return 1.0; }
  bool first_infinite() const override { return true; }
};

// Shared machinery for products: generator g belongs to factor owner[g] with
// local index local[g].
struct CompoundNode : Group::Node {
  std::vector<std::unique_ptr<Group::Node>> factors;
  std::vector<int> owner;
  std::vector<int> local;
  std::vector<int> offset;

  explicit CompoundNode(const std::vector<GroupSpec>& specs) {
    for (std::size_t f = 0; f < specs.size(); ++f) {
      factors.push_back(make_node(specs[f]));
      offset.push_back(gens());
      const auto& node = *factors.back();
      for (int g = 0; g < node.gens(); ++g) {
        labels.push_back("f" + std::to_string(f) + "." + node.labels[static_cast<std::size_t>(g)]);
        inverse.push_back(offset.back() + node.inverse[static_cast<std::size_t>(g)]);
        owner.push_back(static_cast<int>(f));
        local.push_back(g);
      }
    }
  }
};

// Code: [len_0, code_0..., len_1, code_1...].
struct DirectNode final : CompoundNode {
  using CompoundNode::CompoundNode;

  std::vector<Code> split(const Code& a) const {
    std::vector<Code> parts;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const auto n = static_cast<std::size_t>(a[pos]);
      parts.emplace_back(a.begin() + static_cast<std::ptrdiff_t>(pos + 1),
                         a.begin() + static_cast<std::ptrdiff_t>(pos + 1 + n));
      pos += 1 + n;
    }
    return parts;
  }

  static Code join(const std::vector<Code>& parts) {
    Code out;
    for (const auto& p : parts) {
      out.push_back(static_cast<std::int32_t>(p.size()));
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  Code identity() const override {
    std::vector<Code> parts;
    for (const auto& f : factors) parts.push_back(f->identity());
    return join(parts);
  }

  Code gen(int i) const override {
    std::vector<Code> parts;
    for (const auto& f : factors) parts.push_back(f->identity());
    const auto f = static_cast<std::size_t>(owner[static_cast<std::size_t>(i)]);
    parts[f] = factors[f]->gen(local[static_cast<std::size_t>(i)]);
    return join(parts);
  }

  Code mul(const Code& a, const Code& b) const override {
    auto pa = split(a);
    const auto pb = split(b);
    for (std::size_t f = 0; f < factors.size(); ++f) pa[f] = factors[f]->mul(pa[f], pb[f]);
    return join(pa);
  }

  Code inv(const Code& a) const override {
    auto pa = split(a);
    for (std::size_t f = 0; f < factors.size(); ++f) pa[f] = factors[f]->inv(pa[f]);
    return join(pa);
  }

  int len(const Code& a) const override {
    const auto pa = split(a);
    int s = 0;
    for (std::size_t f = 0; f < factors.size(); ++f) s += factors[f]->len(pa[f]);
    return s;
  }

  void spell(const Code& a, Word& out) const override {
    const auto pa = split(a);
    for (std::size_t f = 0; f < factors.size(); ++f) {
      Word w;
      factors[f]->spell(pa[f], w);
      for (auto g : w) out.push_back(offset[f] + g);
    }
  }

  std::optional<double> growth_rate() const override {
    double rate = 1.0;
    for (const auto& f : factors) {
      auto r = f->growth_rate();
      if (!r) return std::nullopt;
      rate = std::max(rate, *r);
    }
    return rate;
  }

  bool first_infinite() const override { return factors.front()->first_infinite(); }
};

// Code: sequence of syllables [factor, len, code...], consecutive syllables
// from different factors, no identity syllables.
struct FreeProductNode final : CompoundNode {
  using CompoundNode::CompoundNode;
  using Syllable = std::pair<int, Code>;

  static std::vector<Syllable> split(const Code& a) {
    std::vector<Syllable> out;
    std::size_t pos = 0;
    while (pos < a.size()) {
      const int f = a[pos];
      const auto n = static_cast<std::size_t>(a[pos + 1]);
      out.emplace_back(f, Code(a.begin() + static_cast<std::ptrdiff_t>(pos + 2),
                               a.begin() + static_cast<std::ptrdiff_t>(pos + 2 + n)));
      pos += 2 + n;
    }
    return out;
  }

  static Code join(const std::vector<Syllable>& syl) {
    Code out;
    for (const auto& [f, c] : syl) {
      out.push_back(f);
      out.push_back(static_cast<std::int32_t>(c.size()));
      out.insert(out.end(), c.begin(), c.end());
    }
    return out;
  }

  Code gen(int i) const override {
    const auto f = owner[static_cast<std::size_t>(i)];
    return join({{f, factors[static_cast<std::size_t>(f)]->gen(local[static_cast<std::size_t>(i)])}});
  }

  Code mul(const Code& a, const Code& b) const override {
    auto sa = split(a);
    for (auto& s : split(b)) {
      if (!sa.empty() && sa.back().first == s.first) {
        const auto& node = *factors[static_cast<std::size_t>(s.first)];
        Code merged = node.mul(sa.back().second, s.second);
        sa.pop_back();
        if (merged != node.identity()) sa.emplace_back(s.first, std::move(merged));
      } else {
        sa.push_back(std::move(s));
      }
    }
    return join(sa);
  }

  Code inv(const Code& a) const override {
    auto sa = split(a);
    std::reverse(sa.begin(), sa.end());
    for (auto& [f, c] : sa) c = factors[static_cast<std::size_t>(f)]->inv(c);
    return join(sa);
  }

  int len(const Code& a) const override {
    int s = 0;
    for (const auto& [f, c] : split(a)) s += factors[static_cast<std::size_t>(f)]->len(c);
    return s;
  }

  void spell(const Code& a, Word& out) const override {
    for (const auto& [f, c] : split(a)) {
      Word w;
      factors[static_cast<std::size_t>(f)]->spell(c, w);
      for (auto g : w) out.push_back(offset[static_cast<std::size_t>(f)] + g);
    }
  }

  std::optional<double> growth_rate() const override {
    if (factors.size() == 1) return factors.front()->growth_rate();
    return std::nullopt;
  }

  bool first_infinite() const override { return factors.front()->first_infinite(); }
};

std::unique_ptr<Group::Node> make_node(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::kFree:
      return std::make_unique<FreeNode>(spec.param);
    case GroupKind::kCyclic:
      return std::make_unique<CyclicNode>(spec.param);
    case GroupKind::kLattice:
      return std::make_unique<LatticeNode>(spec.param);
    case GroupKind::kDirectProduct:
      return std::make_unique<DirectNode>(spec.factors);
    case GroupKind::kFreeProduct:
      return std::make_unique<FreeProductNode>(spec.factors);
  }
  throw InputError("unsupported group kind");
}

}  // namespace

//---------------------------------------------------------------------------//
// Group
//---------------------------------------------------------------------------//

Group::Group(GroupSpec spec) : spec_(std::move(spec)), root_(make_node(spec_)) {}

int Group::generator_count() const { return root_->gens(); }

const std::string& Group::label(int gen) const { return root_->labels.at(static_cast<std::size_t>(gen)); }

int Group::inverse_generator(int gen) const { return root_->inverse.at(static_cast<std::size_t>(gen)); }

Element Group::identity() const { return {root_->identity()}; }

Element Group::generator(int gen) const {
  if (gen < 0 || gen >= generator_count()) throw InputError("generator index out of range");
  return {root_->gen(gen)};
}

Element Group::multiply(const Element& a, const Element& b) const { return {root_->mul(a.code, b.code)}; }

Element Group::multiply_generator(const Element& a, int gen) const {
  return {root_->mul(a.code, root_->gen(gen))};
}

Element Group::inverse(const Element& a) const { return {root_->inv(a.code)}; }

int Group::length(const Element& a) const { return root_->len(a.code); }

Word Group::spell(const Element& a) const {
  Word w;
  root_->spell(a.code, w);
  return w;
}

Element Group::canon(std::span<const int> word) const {
  Code c = root_->identity();
  for (int g : word) {
    if (g < 0 || g >= generator_count()) throw InputError("generator index out of range");
    c = root_->mul(c, root_->gen(g));
  }
  return {std::move(c)};
}

Element Group::canon(std::string_view word) const {
  const auto w = parse_word(word);
  return canon(std::span<const int>(w));
}

Word Group::parse_word(std::string_view text) const {
  const auto& labels = root_->labels;
  const bool single_char = std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.size() == 1; });

  auto lookup = [&](const std::string& tok) -> int {
    for (int g = 0; g < generator_count(); ++g) {
      if (labels[static_cast<std::size_t>(g)] == tok) return g;
    }
    return -1;
  };

  Word out;
  auto push_token = [&](std::string tok) {
    if (tok.empty() || tok == "e") return;
    bool invert = false;
    if (tok.size() > 3 && tok.compare(tok.size() - 3, 3, "^-1") == 0) {
      invert = true;
      tok.resize(tok.size() - 3);
    }
    int g = lookup(tok);
    if (g < 0 && single_char && !invert) {
      Word chars;
      for (char ch : tok) {
        const int cg = lookup(std::string(1, ch));
        if (cg < 0) throw InputError("unknown generator symbol '" + std::string(1, ch) + "'");
        chars.push_back(cg);
      }
      out.insert(out.end(), chars.begin(), chars.end());
      return;
    }
    if (g < 0) throw InputError("unknown generator symbol '" + tok + "'");
    out.push_back(invert ? inverse_generator(g) : g);
  };

  std::string tok;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '*' || ch == ',') {
      push_token(std::move(tok));
      tok.clear();
    } else {
      tok += ch;
    }
  }
  push_token(std::move(tok));
  return out;
}

std::string Group::format(const Element& a) const {
  const auto w = spell(a);
  if (w.empty()) return "e";
  const auto& labels = root_->labels;
  const bool single_char = std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.size() == 1; });
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i && !single_char) out += '*';
    out += labels[static_cast<std::size_t>(w[i])];
  }
  return out;
}

bool Group::less(const Element& a, const Element& b) const {
  const int la = length(a);
  const int lb = length(b);
  if (la != lb) return la < lb;
  return spell(a) < spell(b);
}

std::optional<double> Group::exact_growth_rate() const { return root_->growth_rate(); }

bool Group::first_generator_infinite() const { return root_->first_infinite(); }

//---------------------------------------------------------------------------//
// CayleyBall
//---------------------------------------------------------------------------//

CayleyBall::CayleyBall(Group group, int radius, std::size_t cap)
    : group_(std::move(group)), radius_(radius), gens_(group_.generator_count()) {
  if (radius < 0) throw InputError("ball radius must be >= 0");

  std::vector<Element> level{group_.identity()};
  index_.emplace(level.front(), 0);
  for (int k = 0;; ++k) {
    // Sort the sphere by spelling; all its elements have length k.
    std::vector<std::pair<Word, Element>> keyed;
    keyed.reserve(level.size());
    for (auto& e : level) keyed.emplace_back(group_.spell(e), std::move(e));
    std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

    sphere_start_.push_back(elements_.size());
    for (auto& [w, e] : keyed) {
      index_[e] = static_cast<std::int32_t>(elements_.size());
      elements_.push_back(std::move(e));
      dist_.push_back(k);
    }
    if (k == radius) break;

    level.clear();
    const auto first = sphere_start_.back();
    const auto last = elements_.size();
    for (auto i = first; i < last; ++i) {
      for (int g = 0; g < gens_; ++g) {
        Element next = group_.multiply_generator(elements_[i], g);
        if (index_.find(next) != index_.end()) continue;
        index_.emplace(next, -1);
        level.push_back(std::move(next));
        if (index_.size() > cap) {
          throw ResourceError("ball enumeration of " + group_.spec().name() + " exceeds the cap of " +
                              std::to_string(cap) + " elements");
        }
      }
    }
    if (level.empty()) {
      // Finite group exhausted: remaining spheres are empty.
      for (int j = k + 1; j <= radius; ++j) sphere_start_.push_back(elements_.size());
      break;
    }
  }
  sphere_start_.push_back(elements_.size());

  keys_.reserve(elements_.size());
  for (const auto& e : elements_) keys_.push_back(digest(e));

  neighbors_.assign(elements_.size() * static_cast<std::size_t>(gens_), -1);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    for (int g = 0; g < gens_; ++g) {
      const auto it = index_.find(group_.multiply_generator(elements_[i], g));
      if (it != index_.end()) neighbors_[i * static_cast<std::size_t>(gens_) + static_cast<std::size_t>(g)] = it->second;
    }
  }
}

std::int64_t CayleyBall::find(const Element& e) const {
  const auto it = index_.find(e);
  return it == index_.end() ? -1 : it->second;
}

std::pair<std::size_t, std::size_t> CayleyBall::sphere(int k) const {
  if (k < 0 || k > radius_) return {0, 0};
  return {sphere_start_[static_cast<std::size_t>(k)], sphere_start_[static_cast<std::size_t>(k) + 1]};
}

std::size_t CayleyBall::volume(int k) const {
  if (k < 0) return 0;
  if (k >= radius_) return elements_.size();
  return sphere_start_[static_cast<std::size_t>(k) + 1];
}

std::int64_t CayleyBall::walk(std::size_t i, std::span<const int> word) const {
  std::int64_t cur = static_cast<std::int64_t>(i);
  for (int g : word) {
    cur = neighbor(static_cast<std::size_t>(cur), g);
    if (cur < 0) return -1;
  }
  return cur;
}

}  // namespace horolab
