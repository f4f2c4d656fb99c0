#pragma once

// Declarative model files. A file is a sequence of sections:
//
//   const = { v = 0.00434 }
//   model = { t = { parents = {"mu", "a"}, density = "dnorm" }, ... }
//   data "y" from "baseball.data" column 1
//   repeat_block({"y", "t"})
//   blocks = { {"mu", "a"} }
//   functional = [t1, mu, a]
//   para = { niter = 30000, nburn = 10000, algorithm = "ascm" }
//
// plus dotted single-field forms (`para.dr = 0.1`, `const.v = 1`,
// `model.x = {...}`). docs/model-language.md has the full grammar.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dagmc/expr.hpp"
#include "dagmc/model.hpp"
#include "dagmc/sampler.hpp"

namespace dagmc::lang {

/// Either a built-in density name (applied to the parents in order) or a
/// custom log-density expression.
using DensitySpec = std::variant<std::string, Expr>;

struct NodeTemplate {
  std::string name;
  std::optional<std::vector<std::string>> parents;
  std::optional<DensitySpec> density;
  std::optional<Expr> init_val;
  std::optional<std::size_t> dim;
  /// Fixed observed value given inline.
  std::optional<Expr> value;

  friend bool operator==(const NodeTemplate&, const NodeTemplate&) = default;
};

struct DataBinding {
  std::string node;
  std::string path;
  std::size_t column = 1;  // 1-based
  /// Directory that relative paths are resolved against.
  std::filesystem::path base_dir;

  friend bool operator==(const DataBinding&, const DataBinding&) = default;
};

struct ReplicateDirective {
  std::vector<std::string> block_nodes;
  std::optional<std::size_t> count;

  friend bool operator==(const ReplicateDirective&, const ReplicateDirective&) = default;
};

using ParamValue = std::variant<double, std::string, Expr>;

struct ModelFile {
  std::vector<std::pair<std::string, Expr>> consts;
  std::vector<NodeTemplate> nodes;
  std::vector<DataBinding> data;
  std::vector<ReplicateDirective> replications;
  std::optional<std::vector<std::vector<std::string>>> blocks;
  std::optional<Expr> functional;
  std::vector<std::pair<std::string, ParamValue>> params;

  const ParamValue* param(std::string_view key) const;
  /// The `scaling_adapt` parameter when it holds an expression in
  /// (sc, alpha, dim, k).
  std::optional<Expr> scaling_rule() const;
  const NodeTemplate* node(std::string_view name) const;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

/// Every accepted `para` key.
std::span<const std::string_view> para_keys();

/// Throws SyntaxError (with position) for malformed input, unknown sections,
/// unknown node fields and unknown para keys; ModelError(DuplicateName)
/// when a name is both a const and a node.
ModelFile parse_model(std::string_view text, const std::filesystem::path& base_dir = {});
/// Throws IoError(FileNotFound).
ModelFile parse_model_file(const std::filesystem::path& path);

/// Canonical text that parses back to an equal ModelFile (same base_dir).
std::string to_string(const ModelFile& mf);

/// Later fragments override or extend earlier ones field by field. Throws
/// ModelError(Conflict) when a node is redeclared with different parents.
ModelFile merge_overrides(ModelFile base, std::span<const ModelFile> fragments);

/// Data columns by node name.
using DataMap = std::map<std::string, std::vector<double>, std::less<>>;

/// Reads every data binding through io::read_csv.
DataMap load_data(const ModelFile& mf);

/// Graph declarations: consts first, then node templates with replication
/// directives expanded (copies named <name><i>, i = 1..count; references to
/// other replicated nodes remapped to the same index, external parents
/// shared) and data bound as observed values. Throws
/// ModelError(ReplicateUnknownNode, DataLengthMismatch, UnknownNode).
std::vector<NodeDecl> apply_replications(const ModelFile& mf, const DataMap& data);

/// Throws ModelError(BadConfig) for ill-typed or out-of-range parameters.
RunConfig make_run_config(const ModelFile& mf);

}  // namespace dagmc::lang

namespace dagmc {

/// Everything needed to run a model file.
struct LoadedModel {
  Graph graph;
  std::vector<Block> blocks;
  std::optional<lang::Expr> functional;
  RunConfig config;
};

/// Explicit `blocks` groups plus one block per remaining free node, ordered
/// by topological rank of their first member. Names are node names or
/// `name[i]` components.
std::vector<Block> resolve_blocks(const Graph& graph,
                                  const std::optional<std::vector<std::vector<std::string>>>& groups);

LoadedModel load_model(const lang::ModelFile& mf);

}  // namespace dagmc
