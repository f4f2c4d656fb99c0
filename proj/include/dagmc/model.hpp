#pragma once

// Directed acyclic graphical model. The structure (Graph) is immutable
// after build; node values live in a separate NodeValues owned by a chain.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagmc/densities.hpp"
#include "dagmc/expr.hpp"

namespace dagmc {

enum class NodeKind { stochastic, observed, constant };

/// Conditional log-density of a node: either a built-in applied to argument
/// expressions (the node's own value is the implicit first argument) or a
/// custom expression in which the node's own value is `<name>_`.
struct DensityRef {
  enum class Kind { none, builtin, custom };

  Kind kind = Kind::none;
  std::string builtin;
  std::vector<lang::Expr> args;
  std::optional<lang::Expr> custom;

  static DensityRef none() { return {}; }
  static DensityRef make_builtin(std::string name, std::vector<lang::Expr> args);
  static DensityRef make_custom(lang::Expr expr);
};

/// Input to Graph::build.
struct NodeDecl {
  std::string name;
  NodeKind kind = NodeKind::stochastic;
  std::size_t dim = 1;
  std::vector<std::string> parents;
  DensityRef density;
  std::optional<std::vector<double>> init_val;
  /// Fixed value of observed and constant nodes.
  std::optional<std::vector<double>> value;
};

using NodeId = std::size_t;

struct Node {
  std::string name;
  NodeKind kind;
  std::size_t dim;
  std::size_t offset;  // position of the first component in NodeValues
  std::vector<NodeId> parents;
  /// Nodes whose value the log factor actually reads (subset of parents).
  std::vector<NodeId> factor_inputs;
  std::vector<NodeId> children;
  DensityRef density;
  bool proper = true;

  bool is_free() const { return kind == NodeKind::stochastic; }
};

/// Flat vector of all node components; layout given by Node::offset.
struct NodeValues {
  std::vector<double> flat;
};

/// One free scalar component.
struct Component {
  NodeId node;
  std::size_t index;

  friend bool operator==(const Component&, const Component&) = default;
};

/// Ordered set of free components updated jointly.
struct Block {
  std::vector<Component> members;

  std::size_t dim() const { return members.size(); }
};

class Graph {
public:
  /// Throws ModelError (UnknownParent, DuplicateName), CycleDetected, or
  /// ModelError(InitialDensity) for unusable initial values.
  static Graph build(std::vector<NodeDecl> decls);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::optional<NodeId> find(std::string_view name) const;
  /// Throws ModelError(UnknownNode).
  NodeId id(std::string_view name) const;
  const std::vector<NodeId>& topo_order() const { return topo_order_; }
  /// Position of `id` in topo_order.
  std::size_t topo_rank(NodeId id) const { return topo_rank_[id]; }

  const NodeValues& initial_values() const { return initial_; }
  std::size_t value_size() const { return initial_.flat.size(); }
  std::span<const double> value(const NodeValues& values, NodeId id) const;

  /// Flat index of a component.
  std::size_t flat_index(Component c) const { return nodes_[c.node].offset + c.index; }
  /// "name" for scalar nodes, "name[i]" (1-based) otherwise.
  std::string component_name(Component c) const;
  std::vector<Component> free_components() const;

  /// log p(node | parents) at `values`. Out-of-support values and invalid
  /// parameters give -inf. Other evaluation errors propagate, prefixed with
  /// the node name.
  double log_factor(const NodeValues& values, NodeId id) const;
  /// Sum of all factors.
  double log_joint(const NodeValues& values) const;
  /// Sum of the listed factors, stopping early at -inf.
  double sum_factors(const NodeValues& values, std::span<const NodeId> ids) const;

  /// Block nodes and children reading them, sorted by topological rank.
  std::vector<NodeId> block_dependents(const Block& block) const;
  std::vector<std::string> block_dependent_names(const Block& block) const;

  /// Sum of log factors over block_dependents with `block_values` substituted;
  /// `values` is restored before returning.
  double block_logdensity(NodeValues& values, const Block& block,
                          std::span<const double> block_values) const;

  /// One block per free node (all components together), in topo order.
  std::vector<Block> default_blocks() const;
  /// Throws ModelError(BadBlock) unless the blocks partition the free components.
  void validate_blocks(std::span<const Block> blocks) const;
  /// Free nodes whose only factor is improper.
  std::vector<std::string> improper_free_nodes() const;

private:
  struct CompiledDensity {
    std::vector<lang::CompiledExpr> args;
    std::optional<lang::CompiledExpr> custom;
    const BuiltinDensity* builtin = nullptr;
  };

  std::vector<Node> nodes_;
  std::vector<CompiledDensity> compiled_;
  std::vector<NodeId> topo_order_;
  std::vector<std::size_t> topo_rank_;
  NodeValues initial_;
};

}  // namespace dagmc
