#include "dagmc/modelang.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dagmc/error.hpp"
#include "dagmc/io.hpp"
#include "lexer.hpp"

namespace dagmc::lang {

namespace {

using detail::Tok;
using detail::Token;
using detail::TokenStream;

constexpr std::array<std::string_view, 20> kParaKeys{
    "niter",      "nburn",       "thin",   "seed",       "algorithm",         "covariance_adapt",
    "scaling_adapt", "target_alpha", "proposal", "dof",     "dr",                "burnin",
    "eta",        "eta_power",   "scaling_eta", "scaling_eta_power", "p_mix",   "theta0",
    "eta_counter", "outfile",
};

constexpr std::array<std::string_view, 4> kIntegerKeys{"niter", "nburn", "thin", "seed"};

bool is_integer_key(std::string_view key) {
  return std::find(kIntegerKeys.begin(), kIntegerKeys.end(), key) != kIntegerKeys.end();
}

/// Numeric value of a literal or negated literal.
std::optional<double> literal_value(const Expr& e) {
  if (e.kind() == Expr::Kind::number) return e.value();
  if (e.kind() == Expr::Kind::negate && e.children()[0].kind() == Expr::Kind::number) {
    return -e.children()[0].value();
  }
  return std::nullopt;
}

template <typename T, typename Key>
T* find_named(std::vector<std::pair<std::string, T>>& items, const Key& key) {
  for (auto& [name, value] : items) {
    if (name == key) return &value;
  }
  return nullptr;
}

template <typename T>
void set_named(std::vector<std::pair<std::string, T>>& items, const std::string& key, T value) {
  if (T* slot = find_named(items, key)) {
    *slot = std::move(value);
  } else {
    items.emplace_back(key, std::move(value));
  }
}

class ModelParser {
public:
  ModelParser(std::string_view text, std::filesystem::path base_dir)
      : ts_(detail::tokenize(text)), base_dir_(std::move(base_dir)) {}

  ModelFile parse() {
    while (!ts_.at(Tok::end)) {
      if (ts_.accept(Tok::semicolon)) continue;
      statement();
    }
    for (const auto& [name, value] : mf_.consts) {
      if (mf_.node(name) != nullptr) {
        throw ModelError(ModelError::Kind::DuplicateName,
                         "'" + name + "' is declared both as a const and as a node");
      }
    }
    return std::move(mf_);
  }

private:
  template <typename F>
  void table(F entry) {
    ts_.expect(Tok::lbrace, "'{'");
    while (!ts_.at(Tok::rbrace)) {
      entry();
      if (!ts_.accept(Tok::comma) && !ts_.accept(Tok::semicolon)) break;
    }
    ts_.expect(Tok::rbrace, "'}'");
  }

  std::vector<std::string> string_list() {
    std::vector<std::string> out;
    table([&] { out.push_back(ts_.expect(Tok::string, "a quoted name").text); });
    return out;
  }

  std::size_t count_literal(std::string_view what) {
    const Token& tok = ts_.expect(Tok::number, what);
    if (tok.number < 0 || tok.number != std::floor(tok.number)) {
      ts_.fail_at(tok, std::string(what) + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(tok.number);
  }

  void statement() {
    const Token& head = ts_.peek();
    if (head.kind != Tok::identifier) ts_.fail("expected a section name, found " + describe(head));
    const std::string word = head.text;
    if (word == "const") {
      ts_.next();
      if (ts_.accept(Tok::dot)) {
        const_entry();
      } else {
        ts_.expect(Tok::assign, "'='");
        table([&] { const_entry(); });
      }
    } else if (word == "model") {
      ts_.next();
      if (ts_.accept(Tok::dot)) {
        node_entry();
      } else {
        ts_.expect(Tok::assign, "'='");
        table([&] { node_entry(); });
      }
    } else if (word == "para") {
      ts_.next();
      if (ts_.accept(Tok::dot)) {
        para_entry();
      } else {
        ts_.expect(Tok::assign, "'='");
        table([&] { para_entry(); });
      }
    } else if (word == "functional") {
      ts_.next();
      ts_.expect(Tok::assign, "'='");
      if (ts_.at(Tok::lbrace)) {
        std::vector<Expr> elems;
        table([&] { elems.push_back(ts_.parse_expression()); });
        mf_.functional = Expr::vector(std::move(elems));
      } else {
        mf_.functional = ts_.parse_expression();
      }
    } else if (word == "blocks") {
      ts_.next();
      ts_.expect(Tok::assign, "'='");
      std::vector<std::vector<std::string>> groups;
      table([&] { groups.push_back(string_list()); });
      mf_.blocks = std::move(groups);
    } else if (word == "data") {
      ts_.next();
      DataBinding binding;
      binding.node = ts_.expect(Tok::string, "a quoted node name").text;
      if (!ts_.at_word("from")) ts_.fail("expected 'from', found " + describe(ts_.peek()));
      ts_.next();
      binding.path = ts_.expect(Tok::string, "a quoted path").text;
      if (ts_.at_word("column")) {
        ts_.next();
        const Token& col = ts_.peek();
        binding.column = count_literal("column number");
        if (binding.column == 0) ts_.fail_at(col, "column numbers start at 1");
      }
      binding.base_dir = base_dir_;
      const auto it = std::find_if(mf_.data.begin(), mf_.data.end(),
                                   [&](const DataBinding& d) { return d.node == binding.node; });
      if (it != mf_.data.end()) {
        *it = std::move(binding);
      } else {
        mf_.data.push_back(std::move(binding));
      }
    } else if (word == "repeat_block") {
      ts_.next();
      ts_.expect(Tok::lparen, "'('");
      ReplicateDirective directive;
      directive.block_nodes = string_list();
      if (ts_.accept(Tok::comma)) directive.count = count_literal("replication count");
      ts_.expect(Tok::rparen, "')'");
      mf_.replications.push_back(std::move(directive));
    } else {
      ts_.fail("unknown section '" + word + "'");
    }
  }

  void const_entry() {
    const std::string name = ts_.expect_identifier("a constant name");
    ts_.expect(Tok::assign, "'='");
    set_named(mf_.consts, name, ts_.parse_expression());
  }

  void node_entry() {
    const Token& tok = ts_.peek();
    NodeTemplate node;
    node.name = ts_.expect_identifier("a node name");
    if (mf_.node(node.name) != nullptr) {
      ts_.fail_at(tok, "node '" + node.name + "' declared twice");
    }
    ts_.expect(Tok::assign, "'='");
    table([&] {
      const Token& field_tok = ts_.peek();
      const std::string field = ts_.expect_identifier("a node field");
      ts_.expect(Tok::assign, "'='");
      if (field == "parents") {
        node.parents = string_list();
      } else if (field == "density") {
        if (ts_.at(Tok::string)) {
          node.density = DensitySpec(ts_.next().text);
        } else {
          node.density = DensitySpec(ts_.parse_expression());
        }
      } else if (field == "init_val") {
        node.init_val = ts_.parse_expression();
      } else if (field == "dim") {
        node.dim = count_literal("dim");
        if (*node.dim == 0) ts_.fail_at(field_tok, "dim must be positive");
      } else if (field == "value") {
        node.value = ts_.parse_expression();
      } else {
        ts_.fail_at(field_tok, "unknown node field '" + field + "'");
      }
    });
    mf_.nodes.push_back(std::move(node));
  }

  void para_entry() {
    const Token& key_tok = ts_.peek();
    const std::string key = ts_.expect_identifier("a parameter name");
    if (std::find(kParaKeys.begin(), kParaKeys.end(), key) == kParaKeys.end()) {
      ts_.fail_at(key_tok, "unknown para key '" + key + "'");
    }
    ts_.expect(Tok::assign, "'='");
    const Token& value_tok = ts_.peek();
    ParamValue value;
    if (ts_.at(Tok::string)) {
      value = ts_.next().text;
    } else {
      Expr e = ts_.parse_expression();
      if (auto v = literal_value(e)) {
        value = *v;
      } else {
        value = std::move(e);
      }
    }
    if (is_integer_key(key)) {
      const double* v = std::get_if<double>(&value);
      if (v == nullptr || *v < 0 || *v != std::floor(*v)) {
        ts_.fail_at(value_tok, "para." + key + " must be a non-negative integer");
      }
    }
    set_named(mf_.params, key, std::move(value));
  }

  TokenStream ts_;
  std::filesystem::path base_dir_;
  ModelFile mf_;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string quoted_list(const std::vector<std::string>& items) {
  std::string out = "{";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += quote(items[i]);
  }
  return out + "}";
}

[[noreturn]] void bad_config(const std::string& message) {
  throw ModelError(ModelError::Kind::BadConfig, message);
}

std::vector<double> eval_numbers(const Expr& e, const std::map<std::string, Value, std::less<>>& env,
                                 const std::string& what) {
  try {
    const Value v = eval_expr(e, env);
    return std::vector<double>(v.elements().begin(), v.elements().end());
  } catch (const EvaluationError& err) {
    bad_config(what + ": " + err.what());
  }
}

}  // namespace

std::span<const std::string_view> para_keys() { return kParaKeys; }

const ParamValue* ModelFile::param(std::string_view key) const {
  for (const auto& [name, value] : params) {
    if (name == key) return &value;
  }
  return nullptr;
}

std::optional<Expr> ModelFile::scaling_rule() const {
  const ParamValue* v = param("scaling_adapt");
  if (v == nullptr) return std::nullopt;
  if (const auto* e = std::get_if<Expr>(v)) return *e;
  return std::nullopt;
}

const NodeTemplate* ModelFile::node(std::string_view name) const {
  for (const auto& n : nodes) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

ModelFile parse_model(std::string_view text, const std::filesystem::path& base_dir) {
  return ModelParser(text, base_dir).parse();
}

ModelFile parse_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::FileNotFound, "file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), path.parent_path());
}

std::string to_string(const ModelFile& mf) {
  std::string out;
  if (!mf.consts.empty()) {
    out += "const = {\n";
    for (const auto& [name, value] : mf.consts) out += "  " + name + " = " + to_string(value) + ",\n";
    out += "}\n";
  }
  if (!mf.nodes.empty()) {
    out += "model = {\n";
    for (const auto& node : mf.nodes) {
      std::vector<std::string> fields;
      if (node.parents) fields.push_back("parents = " + quoted_list(*node.parents));
      if (node.density) {
        if (const auto* name = std::get_if<std::string>(&*node.density)) {
          fields.push_back("density = " + quote(*name));
        } else {
          fields.push_back("density = " + to_string(std::get<Expr>(*node.density)));
        }
      }
      if (node.init_val) fields.push_back("init_val = " + to_string(*node.init_val));
      if (node.dim) fields.push_back("dim = " + std::to_string(*node.dim));
      if (node.value) fields.push_back("value = " + to_string(*node.value));
      out += "  " + node.name + " = {";
      for (std::size_t i = 0; i < fields.size(); ++i) out += (i > 0 ? ", " : " ") + fields[i];
      out += fields.empty() ? "},\n" : " },\n";
    }
    out += "}\n";
  }
  for (const auto& d : mf.data) {
    out += "data " + quote(d.node) + " from " + quote(d.path) + " column " +
           std::to_string(d.column) + "\n";
  }
  for (const auto& r : mf.replications) {
    out += "repeat_block(" + quoted_list(r.block_nodes);
    if (r.count) out += ", " + std::to_string(*r.count);
    out += ")\n";
  }
  if (mf.blocks) {
    out += "blocks = {";
    for (std::size_t i = 0; i < mf.blocks->size(); ++i) {
      out += (i > 0 ? ", " : " ") + quoted_list((*mf.blocks)[i]);
    }
    out += " }\n";
  }
  if (mf.functional) out += "functional = " + to_string(*mf.functional) + "\n";
  if (!mf.params.empty()) {
    out += "para = {\n";
    for (const auto& [key, value] : mf.params) {
      out += "  " + key + " = ";
      if (const auto* d = std::get_if<double>(&value)) {
        out += to_string(*d < 0 ? Expr::negate(Expr::number(-*d)) : Expr::number(*d));
      } else if (const auto* s = std::get_if<std::string>(&value)) {
        out += quote(*s);
      } else {
        out += to_string(std::get<Expr>(value));
      }
      out += ",\n";
    }
    out += "}\n";
  }
  return out;
}

ModelFile merge_overrides(ModelFile base, std::span<const ModelFile> fragments) {
  for (const auto& frag : fragments) {
    for (const auto& [name, value] : frag.consts) set_named(base.consts, name, value);
    for (const auto& node : frag.nodes) {
      auto it = std::find_if(base.nodes.begin(), base.nodes.end(),
                             [&](const NodeTemplate& n) { return n.name == node.name; });
      if (it == base.nodes.end()) {
        base.nodes.push_back(node);
        continue;
      }
      if (node.parents && it->parents && *node.parents != *it->parents) {
        throw ModelError(ModelError::Kind::Conflict,
                         "node '" + node.name + "' redeclared with different parents");
      }
      if (node.parents) it->parents = node.parents;
      if (node.density) it->density = node.density;
      if (node.init_val) it->init_val = node.init_val;
      if (node.dim) it->dim = node.dim;
      if (node.value) it->value = node.value;
    }
    for (const auto& d : frag.data) {
      auto it = std::find_if(base.data.begin(), base.data.end(),
                             [&](const DataBinding& b) { return b.node == d.node; });
      if (it != base.data.end()) {
        *it = d;
      } else {
        base.data.push_back(d);
      }
    }
    for (const auto& r : frag.replications) {
      if (std::find(base.replications.begin(), base.replications.end(), r) ==
          base.replications.end()) {
        base.replications.push_back(r);
      }
    }
    if (frag.blocks) base.blocks = frag.blocks;
    if (frag.functional) base.functional = frag.functional;
    for (const auto& [key, value] : frag.params) set_named(base.params, key, value);
  }
  for (const auto& [name, value] : base.consts) {
    if (base.node(name) != nullptr) {
      throw ModelError(ModelError::Kind::DuplicateName,
                       "'" + name + "' is declared both as a const and as a node");
    }
  }
  return base;
}

DataMap load_data(const ModelFile& mf) {
  DataMap out;
  for (const auto& binding : mf.data) {
    std::filesystem::path path(binding.path);
    if (path.is_relative() && !binding.base_dir.empty()) path = binding.base_dir / path;
    const io::Table table = io::read_csv(path);
    if (binding.column > table.ncols) {
      throw IoError(IoError::Kind::Parse, path.string() + " has no column " +
                                              std::to_string(binding.column));
    }
    out[binding.node] = table.column(binding.column - 1);
  }
  return out;
}

std::vector<NodeDecl> apply_replications(const ModelFile& mf, const DataMap& data) {
  std::vector<NodeDecl> decls;
  std::map<std::string, Value, std::less<>> env;
  for (const auto& [name, expr] : mf.consts) {
    auto value = eval_numbers(expr, env, "const " + name);
    env[name] = value.size() == 1 ? Value(value[0]) : Value::vector(value);
    NodeDecl decl;
    decl.name = name;
    decl.kind = NodeKind::constant;
    decl.value = std::move(value);
    decls.push_back(std::move(decl));
  }
  const std::size_t first_node = decls.size();

  for (const auto& t : mf.nodes) {
    NodeDecl decl;
    decl.name = t.name;
    decl.dim = t.dim.value_or(1);
    if (t.parents) decl.parents = *t.parents;
    if (t.density) {
      if (const auto* name = std::get_if<std::string>(&*t.density)) {
        decl.density = DensityRef::make_builtin(*name, {});
      } else {
        decl.density = DensityRef::make_custom(std::get<Expr>(*t.density));
      }
    }
    if (t.init_val) decl.init_val = eval_numbers(*t.init_val, env, "init_val of " + t.name);
    if (t.value) {
      decl.value = eval_numbers(*t.value, env, "value of " + t.name);
      decl.kind = NodeKind::observed;
    }
    decls.push_back(std::move(decl));
  }
  for (const auto& [node, values] : data) {
    if (mf.node(node) == nullptr) {
      throw ModelError(ModelError::Kind::UnknownNode, "data bound to unknown node '" + node + "'");
    }
  }

  for (const auto& directive : mf.replications) {
    std::optional<std::size_t> count = directive.count;
    for (const auto& name : directive.block_nodes) {
      const bool present = std::any_of(decls.begin() + static_cast<std::ptrdiff_t>(first_node),
                                       decls.end(), [&](const NodeDecl& d) { return d.name == name; });
      if (!present) {
        throw ModelError(ModelError::Kind::ReplicateUnknownNode,
                         "repeat_block: unknown node '" + name + "'");
      }
      const auto it = data.find(name);
      if (it == data.end()) continue;
      if (count && *count != it->second.size()) {
        throw ModelError(ModelError::Kind::DataLengthMismatch,
                         "repeat_block: " + std::to_string(*count) + " copies but " +
                             std::to_string(it->second.size()) + " data values for '" + name + "'");
      }
      count = it->second.size();
    }
    if (!count || *count == 0) {
      throw ModelError(ModelError::Kind::BadConfig,
                       "repeat_block needs a positive count or bound data");
    }

    const auto& block = directive.block_nodes;
    auto in_block = [&](const std::string& name) {
      return std::find(block.begin(), block.end(), name) != block.end();
    };
    std::vector<NodeDecl> expanded;
    for (auto& decl : decls) {
      if (!in_block(decl.name)) {
        expanded.push_back(std::move(decl));
        continue;
      }
      const auto data_it = data.find(decl.name);
      for (std::size_t i = 1; i <= *count; ++i) {
        const std::string suffix = std::to_string(i);
        const auto rename = [&](const std::string& n) -> std::optional<std::string> {
          if (in_block(n)) return n + suffix;
          if (n.size() > 1 && n.back() == '_' && in_block(n.substr(0, n.size() - 1))) {
            return n.substr(0, n.size() - 1) + suffix + "_";
          }
          return std::nullopt;
        };
        NodeDecl copy = decl;
        copy.name = decl.name + suffix;
        for (auto& p : copy.parents) {
          if (in_block(p)) p += suffix;
        }
        if (copy.density.custom) copy.density.custom = rename_variables(*copy.density.custom, rename);
        for (auto& arg : copy.density.args) arg = rename_variables(arg, rename);
        if (data_it != data.end()) {
          copy.value = std::vector<double>{data_it->second[i - 1]};
          copy.kind = NodeKind::observed;
        }
        expanded.push_back(std::move(copy));
      }
    }
    decls = std::move(expanded);
  }

  // Data on nodes that were not replicated binds the whole column.
  for (auto& decl : decls) {
    const auto it = data.find(decl.name);
    if (it == data.end()) continue;
    decl.value = it->second;
    decl.kind = NodeKind::observed;
  }
  return decls;
}

RunConfig make_run_config(const ModelFile& mf) {
  RunConfig cfg;
  auto number = [&](const std::string& key) -> std::optional<double> {
    const ParamValue* v = mf.param(key);
    if (v == nullptr) return std::nullopt;
    if (const auto* d = std::get_if<double>(v)) return *d;
    bad_config("para." + key + " must be a number");
  };
  auto text = [&](const std::string& key) -> std::optional<std::string> {
    const ParamValue* v = mf.param(key);
    if (v == nullptr) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(v)) return *s;
    bad_config("para." + key + " must be a string");
  };
  auto integer = [&](const std::string& key) -> std::optional<std::uint64_t> {
    const auto v = number(key);
    if (!v) return std::nullopt;
    return static_cast<std::uint64_t>(*v);
  };

  if (auto v = integer("niter")) cfg.niter = *v;
  if (auto v = integer("nburn")) cfg.nburn = *v;
  if (auto v = integer("thin")) cfg.thin = *v;
  if (auto v = integer("seed")) cfg.seed = *v;

  if (auto algo = text("algorithm")) {
    static const std::map<std::string, std::pair<CovarianceAdapt, ScalingAdapt>, std::less<>> kAlgos{
        {"none", {CovarianceAdapt::none, ScalingAdapt::none}},
        {"metropolis", {CovarianceAdapt::none, ScalingAdapt::none}},
        {"am", {CovarianceAdapt::am, ScalingAdapt::none}},
        {"ascm", {CovarianceAdapt::none, ScalingAdapt::ascm}},
        {"am+ascm", {CovarianceAdapt::am, ScalingAdapt::ascm}},
        {"rbam", {CovarianceAdapt::rb_am, ScalingAdapt::none}},
        {"rbam+ascm", {CovarianceAdapt::rb_am, ScalingAdapt::ascm}},
    };
    const auto it = kAlgos.find(*algo);
    if (it == kAlgos.end()) bad_config("unknown algorithm '" + *algo + "'");
    cfg.algorithm.covariance = it->second.first;
    cfg.algorithm.scaling = it->second.second;
  }
  if (auto cov = text("covariance_adapt")) {
    if (*cov == "none") {
      cfg.algorithm.covariance = CovarianceAdapt::none;
    } else if (*cov == "am") {
      cfg.algorithm.covariance = CovarianceAdapt::am;
    } else if (*cov == "rbam") {
      cfg.algorithm.covariance = CovarianceAdapt::rb_am;
    } else {
      bad_config("unknown covariance_adapt '" + *cov + "'");
    }
  }
  if (const ParamValue* v = mf.param("scaling_adapt")) {
    if (const auto* s = std::get_if<std::string>(v)) {
      if (*s == "none") {
        cfg.algorithm.scaling = ScalingAdapt::none;
      } else if (*s == "ascm") {
        cfg.algorithm.scaling = ScalingAdapt::ascm;
      } else if (*s == "amcmc") {
        cfg.algorithm.scaling = ScalingAdapt::amcmc_rule;
      } else {
        bad_config("unknown scaling_adapt '" + *s + "'");
      }
    } else if (const auto* e = std::get_if<Expr>(v)) {
      auto rule = CompiledExpr::compile(*e, [](const std::string& name) -> std::optional<Slot> {
        static const std::array<std::string_view, 4> kArgs{"sc", "alpha", "dim", "k"};
        for (std::size_t i = 0; i < kArgs.size(); ++i) {
          if (name == kArgs[i]) return Slot{i, 1, false};
        }
        return std::nullopt;
      });
      cfg.algorithm.scaling = ScalingAdapt::user_rule;
      cfg.algorithm.user_rule = [rule](double sc, double alpha, std::size_t dim, std::uint64_t k) {
        const double frame[4] = {sc, alpha, static_cast<double>(dim), static_cast<double>(k)};
        return rule.eval(frame).scalar();
      };
    } else {
      bad_config("para.scaling_adapt must be a name or an expression in (sc, alpha, dim, k)");
    }
  }
  if (auto v = number("target_alpha")) cfg.algorithm.target_alpha = *v;

  const double dof = number("dof").value_or(ProposalKind::kDefaultDof);
  try {
    cfg.proposal = ProposalKind::parse(text("proposal").value_or("gaussian"), dof);
  } catch (const InvalidParameter& e) {
    bad_config(e.what());
  }
  if (auto v = number("dr")) cfg.dr_scale = *v;

  if (auto b = text("burnin")) {
    if (*b == "greedy") {
      cfg.burnin = BurninStrategy::Kind::greedy;
    } else if (*b == "traditional") {
      cfg.burnin = BurninStrategy::Kind::traditional;
    } else if (*b == "freeze") {
      cfg.burnin = BurninStrategy::Kind::freeze;
    } else {
      bad_config("unknown burnin strategy '" + *b + "'");
    }
  }

  auto schedule = [&](const std::string& key, const std::string& power_key,
                      WeightSchedule fallback) {
    WeightSchedule out = fallback;
    try {
      if (const ParamValue* v = mf.param(key)) {
        if (const auto* s = std::get_if<std::string>(v)) {
          if (*s != "reciprocal") bad_config("para." + key + " must be \"reciprocal\" or a number");
          out = WeightSchedule::reciprocal();
        } else if (const auto* d = std::get_if<double>(v)) {
          out = WeightSchedule::constant(*d);
        } else {
          bad_config("para." + key + " must be \"reciprocal\" or a number");
        }
      }
      if (auto g = number(power_key)) out = WeightSchedule::power(*g);
    } catch (const InvalidParameter& e) {
      bad_config("para." + key + ": " + e.what());
    }
    return out;
  };
  cfg.covariance_weights = schedule("eta", "eta_power", WeightSchedule::reciprocal());
  cfg.scaling_weights = schedule("scaling_eta", "scaling_eta_power", cfg.covariance_weights);

  if (const ParamValue* v = mf.param("p_mix")) {
    if (const auto* d = std::get_if<double>(v)) {
      if (!(*d >= 0.0 && *d <= 1.0)) bad_config("para.p_mix must lie in [0,1]");
      cfg.mix = MixSchedule::constant(*d);
    } else if (const auto* e = std::get_if<Expr>(v)) {
      auto seq = CompiledExpr::compile(*e, [](const std::string& name) -> std::optional<Slot> {
        if (name == "n") return Slot{0, 1, false};
        return std::nullopt;
      });
      cfg.mix = MixSchedule::user([seq](std::uint64_t n) {
        const double frame[1] = {static_cast<double>(n)};
        return seq.eval(frame).scalar();
      });
    } else {
      bad_config("para.p_mix must be a number or an expression in n");
    }
  }
  if (auto v = number("theta0")) cfg.theta0 = *v;
  if (auto c = text("eta_counter")) {
    if (*c == "block") {
      cfg.global_step_counter = false;
    } else if (*c == "global") {
      cfg.global_step_counter = true;
    } else {
      bad_config("para.eta_counter must be \"block\" or \"global\"");
    }
  }
  if (auto out = text("outfile")) cfg.outfile = *out;
  cfg.validate();
  return cfg;
}

}  // namespace dagmc::lang

namespace dagmc {

std::vector<Block> resolve_blocks(const Graph& graph,
                                  const std::optional<std::vector<std::vector<std::string>>>& groups) {
  std::vector<Block> blocks;
  std::vector<bool> covered(graph.value_size(), false);
  if (groups) {
    for (const auto& group : *groups) {
      Block block;
      for (const auto& name : group) {
        std::string base = name;
        std::optional<std::size_t> component;
        if (const auto open = name.find('['); open != std::string::npos && name.back() == ']') {
          base = name.substr(0, open);
          const std::string idx = name.substr(open + 1, name.size() - open - 2);
          try {
            component = std::stoul(idx);
          } catch (const std::exception&) {
            throw ModelError(ModelError::Kind::BadBlock, "bad block member '" + name + "'");
          }
        }
        const auto id = graph.find(base);
        if (!id) throw ModelError(ModelError::Kind::BadBlock, "unknown block member '" + name + "'");
        const Node& node = graph.node(*id);
        if (component) {
          if (*component == 0 || *component > node.dim) {
            throw ModelError(ModelError::Kind::BadBlock, "component out of range: '" + name + "'");
          }
          block.members.push_back({*id, *component - 1});
        } else {
          for (std::size_t i = 0; i < node.dim; ++i) block.members.push_back({*id, i});
        }
      }
      for (const auto& m : block.members) {
        if (covered[graph.flat_index(m)]) {
          throw ModelError(ModelError::Kind::BadBlock,
                           "'" + graph.component_name(m) + "' appears in two blocks");
        }
        covered[graph.flat_index(m)] = true;
      }
      blocks.push_back(std::move(block));
    }
  }
  for (NodeId id : graph.topo_order()) {
    const Node& node = graph.node(id);
    if (!node.is_free()) continue;
    Block block;
    for (std::size_t i = 0; i < node.dim; ++i) {
      if (!covered[node.offset + i]) block.members.push_back({id, i});
    }
    if (!block.members.empty()) blocks.push_back(std::move(block));
  }
  std::stable_sort(blocks.begin(), blocks.end(), [&](const Block& a, const Block& b) {
    return graph.topo_rank(a.members.front().node) < graph.topo_rank(b.members.front().node);
  });
  graph.validate_blocks(blocks);
  return blocks;
}

LoadedModel load_model(const lang::ModelFile& mf) {
  const auto data = lang::load_data(mf);
  Graph graph = Graph::build(lang::apply_replications(mf, data));
  if (graph.free_components().empty()) {
    throw ModelError(ModelError::Kind::BadConfig, "model has no free nodes to sample");
  }
  auto blocks = resolve_blocks(graph, mf.blocks);
  RunConfig config = lang::make_run_config(mf);
  return LoadedModel{std::move(graph), std::move(blocks), mf.functional, std::move(config)};
}

}  // namespace dagmc
