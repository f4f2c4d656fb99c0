#include "dagmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>

#include "dagmc/error.hpp"

namespace dagmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using lang::CompiledExpr;
using lang::Slot;

}  // namespace

DensityRef DensityRef::make_builtin(std::string name, std::vector<lang::Expr> args) {
  DensityRef d;
  d.kind = Kind::builtin;
  d.builtin = std::move(name);
  d.args = std::move(args);
  return d;
}

DensityRef DensityRef::make_custom(lang::Expr expr) {
  DensityRef d;
  d.kind = Kind::custom;
  d.custom = std::move(expr);
  return d;
}

Graph Graph::build(std::vector<NodeDecl> decls) {
  Graph g;
  std::map<std::string, NodeId, std::less<>> index;

  std::size_t offset = 0;
  for (auto& decl : decls) {
    if (index.count(decl.name) > 0) {
      throw ModelError(ModelError::Kind::DuplicateName, "duplicate node name: " + decl.name);
    }
    const bool fixed = decl.kind != NodeKind::stochastic;
    if (fixed && !decl.value) {
      throw ModelError(ModelError::Kind::BadConfig, "node '" + decl.name + "' has no value");
    }
    std::size_t dim = decl.dim;
    if (fixed) {
      dim = decl.value->size();
    } else if (decl.init_val && decl.init_val->size() != dim && decl.init_val->size() != 1) {
      if (dim != 1) {
        throw ModelError(ModelError::Kind::BadConfig,
                         "node '" + decl.name + "': init_val length does not match dim");
      }
      dim = decl.init_val->size();
    }
    if (dim == 0) {
      throw ModelError(ModelError::Kind::BadConfig, "node '" + decl.name + "' has dimension 0");
    }
    if (decl.kind == NodeKind::stochastic && decl.density.kind == DensityRef::Kind::none) {
      throw ModelError(ModelError::Kind::BadConfig, "node '" + decl.name + "' has no density");
    }
    index.emplace(decl.name, g.nodes_.size());
    g.nodes_.push_back(Node{decl.name, decl.kind, dim, offset, {}, {}, {}, decl.density, true});
    offset += dim;
  }

  // Parents and compiled densities.
  g.compiled_.resize(g.nodes_.size());
  for (NodeId id = 0; id < g.nodes_.size(); ++id) {
    Node& node = g.nodes_[id];
    const NodeDecl& decl = decls[id];
    for (const auto& parent : decl.parents) {
      const auto it = index.find(parent);
      if (it == index.end()) {
        throw ModelError(ModelError::Kind::UnknownParent,
                         "node '" + node.name + "': unknown parent '" + parent + "'");
      }
      if (std::find(node.parents.begin(), node.parents.end(), it->second) == node.parents.end()) {
        node.parents.push_back(it->second);
      }
    }

    std::vector<NodeId> inputs;
    const std::string self_name = node.name + "_";
    const lang::Resolver resolve = [&](const std::string& name) -> std::optional<Slot> {
      NodeId target;
      if (name == self_name) {
        target = id;
      } else {
        const auto it = index.find(name);
        if (it == index.end()) {
          throw ModelError(ModelError::Kind::UnknownParent,
                           "node '" + node.name + "': unknown identifier '" + name + "'");
        }
        target = it->second;
        if (std::find(inputs.begin(), inputs.end(), target) == inputs.end()) {
          inputs.push_back(target);
        }
      }
      const Node& t = g.nodes_[target];
      return Slot{t.offset, t.dim, t.dim > 1};
    };

    CompiledDensity& cd = g.compiled_[id];
    switch (node.density.kind) {
      case DensityRef::Kind::none: break;
      case DensityRef::Kind::builtin: {
        cd.builtin = find_builtin(node.density.builtin);
        if (cd.builtin == nullptr) throw UnknownDensity(node.density.builtin);
        if (node.density.args.empty() && cd.builtin->arity > 0) {
          for (const auto& parent : decl.parents) node.density.args.push_back(lang::Expr::identifier(parent));
        }
        if (node.density.args.size() != cd.builtin->arity) {
          throw BadArity("node '" + node.name + "': " + node.density.builtin + " takes " +
                         std::to_string(cd.builtin->arity) + " parameters, got " +
                         std::to_string(node.density.args.size()));
        }
        for (const auto& arg : node.density.args) {
          cd.args.push_back(CompiledExpr::compile(arg, resolve));
        }
        node.proper = cd.builtin->proper;
        break;
      }
      case DensityRef::Kind::custom:
        cd.custom = CompiledExpr::compile(*node.density.custom, resolve);
        break;
    }
    if (std::find(inputs.begin(), inputs.end(), id) != inputs.end()) {
      throw CycleDetected({node.name, node.name});
    }
    for (NodeId input : inputs) {
      if (std::find(node.parents.begin(), node.parents.end(), input) == node.parents.end()) {
        node.parents.push_back(input);
      }
    }
    node.factor_inputs = std::move(inputs);
  }

  for (NodeId id = 0; id < g.nodes_.size(); ++id) {
    for (NodeId p : g.nodes_[id].parents) {
      if (p == id) throw CycleDetected({g.nodes_[id].name, g.nodes_[id].name});
      g.nodes_[p].children.push_back(id);
    }
  }

  // Cycle search (DFS over parent edges), reporting the cycle in edge order.
  {
    enum class Mark { white, grey, black };
    std::vector<Mark> mark(g.nodes_.size(), Mark::white);
    std::vector<NodeId> stack;
    std::function<void(NodeId)> visit = [&](NodeId v) {
      mark[v] = Mark::grey;
      stack.push_back(v);
      for (NodeId c : g.nodes_[v].children) {
        if (mark[c] == Mark::grey) {
          std::vector<std::string> cycle;
          auto it = std::find(stack.begin(), stack.end(), c);
          for (; it != stack.end(); ++it) cycle.push_back(g.nodes_[*it].name);
          cycle.push_back(g.nodes_[c].name);
          throw CycleDetected(std::move(cycle));
        }
        if (mark[c] == Mark::white) visit(c);
      }
      stack.pop_back();
      mark[v] = Mark::black;
    };
    for (NodeId v = 0; v < g.nodes_.size(); ++v) {
      if (mark[v] == Mark::white) visit(v);
    }
  }

  // Kahn's algorithm; ties broken by declaration order.
  {
    std::vector<std::size_t> pending(g.nodes_.size());
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < g.nodes_.size(); ++v) {
      pending[v] = g.nodes_[v].parents.size();
      if (pending[v] == 0) ready.push(v);
    }
    while (!ready.empty()) {
      const NodeId v = ready.top();
      ready.pop();
      g.topo_order_.push_back(v);
      for (NodeId c : g.nodes_[v].children) {
        if (--pending[c] == 0) ready.push(c);
      }
    }
    g.topo_rank_.resize(g.nodes_.size());
    for (std::size_t r = 0; r < g.topo_order_.size(); ++r) g.topo_rank_[g.topo_order_[r]] = r;
  }

  // Initial values, parents first.
  g.initial_.flat.assign(offset, 0.0);
  for (NodeId id : g.topo_order_) {
    const Node& node = g.nodes_[id];
    const NodeDecl& decl = decls[id];
    auto dest = g.initial_.flat.begin() + static_cast<std::ptrdiff_t>(node.offset);
    if (decl.value) {
      std::copy(decl.value->begin(), decl.value->end(), dest);
    } else if (decl.init_val) {
      if (decl.init_val->size() == 1) {
        std::fill_n(dest, node.dim, decl.init_val->front());
      } else {
        std::copy(decl.init_val->begin(), decl.init_val->end(), dest);
      }
    } else if (const auto& cd = g.compiled_[id]; cd.builtin != nullptr) {
      double start = 0.0;
      try {
        std::vector<double> params;
        for (const auto& arg : cd.args) params.push_back(arg.eval(g.initial_.flat).scalar());
        start = cd.builtin->default_start(params);
      } catch (const Error&) {
        start = 0.0;
      }
      std::fill_n(dest, node.dim, start);
    }
  }
  return g;
}

std::optional<NodeId> Graph::find(std::string_view name) const {
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].name == name) return id;
  }
  return std::nullopt;
}

NodeId Graph::id(std::string_view name) const {
  const auto found = find(name);
  if (!found) throw ModelError(ModelError::Kind::UnknownNode, "unknown node: " + std::string(name));
  return *found;
}

std::span<const double> Graph::value(const NodeValues& values, NodeId id) const {
  const Node& n = nodes_[id];
  return std::span<const double>(values.flat).subspan(n.offset, n.dim);
}

std::string Graph::component_name(Component c) const {
  const Node& n = nodes_[c.node];
  if (n.dim == 1) return n.name;
  return n.name + "[" + std::to_string(c.index + 1) + "]";
}

std::vector<Component> Graph::free_components() const {
  std::vector<Component> out;
  for (NodeId id : topo_order_) {
    if (!nodes_[id].is_free()) continue;
    for (std::size_t i = 0; i < nodes_[id].dim; ++i) out.push_back({id, i});
  }
  return out;
}

double Graph::log_factor(const NodeValues& values, NodeId id) const {
  const Node& node = nodes_[id];
  const CompiledDensity& cd = compiled_[id];
  try {
    switch (node.density.kind) {
      case DensityRef::Kind::none: return 0.0;
      case DensityRef::Kind::builtin: {
        const auto x = value(values, id);
        const std::size_t arity = cd.args.size();
        if (arity == 0) {
          double total = 0.0;
          for (double xi : x) total += cd.builtin->log_density(xi, {});
          return total;
        }
        double params[4];
        if (node.dim == 1) {
          for (std::size_t k = 0; k < arity; ++k) params[k] = cd.args[k].eval(values.flat).scalar();
          return cd.builtin->log_density(x[0], std::span<const double>(params, arity));
        }
        std::vector<lang::Value> vals;
        for (const auto& arg : cd.args) {
          vals.push_back(arg.eval(values.flat));
          if (vals.back().is_vector() && vals.back().size() != node.dim) {
            throw EvaluationError("parameter length does not match node dimension");
          }
        }
        double total = 0.0;
        for (std::size_t i = 0; i < node.dim; ++i) {
          for (std::size_t k = 0; k < arity; ++k) {
            params[k] = vals[k].is_vector() ? vals[k].elements()[i] : vals[k].elements()[0];
          }
          total += cd.builtin->log_density(x[i], std::span<const double>(params, arity));
          if (total == kNegInf) return total;
        }
        return total;
      }
      case DensityRef::Kind::custom: {
        const double v = cd.custom->eval(values.flat).scalar();
        return std::isnan(v) ? kNegInf : v;
      }
    }
  } catch (const DomainError&) {
    return kNegInf;
  } catch (const InvalidParameter&) {
    return kNegInf;
  } catch (const EvaluationError& e) {
    throw EvaluationError("node '" + node.name + "': " + e.what());
  }
  return 0.0;
}

double Graph::log_joint(const NodeValues& values) const {
  double total = 0.0;
  for (NodeId id = 0; id < nodes_.size(); ++id) total += log_factor(values, id);
  return total;
}

double Graph::sum_factors(const NodeValues& values, std::span<const NodeId> ids) const {
  double total = 0.0;
  for (NodeId id : ids) {
    total += log_factor(values, id);
    if (total == kNegInf) break;
  }
  return total;
}

std::vector<NodeId> Graph::block_dependents(const Block& block) const {
  std::vector<bool> in_block(nodes_.size(), false);
  for (const auto& m : block.members) in_block[m.node] = true;
  std::vector<NodeId> out;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    bool depends = in_block[id];
    for (NodeId input : nodes_[id].factor_inputs) depends = depends || in_block[input];
    if (depends) out.push_back(id);
  }
  std::sort(out.begin(), out.end(),
            [&](NodeId a, NodeId b) { return topo_rank_[a] < topo_rank_[b]; });
  return out;
}

std::vector<std::string> Graph::block_dependent_names(const Block& block) const {
  std::vector<std::string> out;
  for (NodeId id : block_dependents(block)) out.push_back(nodes_[id].name);
  return out;
}

double Graph::block_logdensity(NodeValues& values, const Block& block,
                               std::span<const double> block_values) const {
  if (block_values.size() != block.dim()) {
    throw DimensionMismatch("block has dimension " + std::to_string(block.dim()) + ", got " +
                            std::to_string(block_values.size()) + " values");
  }
  std::vector<double> saved(block.dim());
  for (std::size_t i = 0; i < block.dim(); ++i) {
    const std::size_t k = flat_index(block.members[i]);
    saved[i] = values.flat[k];
    values.flat[k] = block_values[i];
  }
  auto restore = [&] {
    for (std::size_t i = 0; i < block.dim(); ++i) values.flat[flat_index(block.members[i])] = saved[i];
  };
  double total = 0.0;
  try {
    total = sum_factors(values, block_dependents(block));
  } catch (...) {
    restore();
    throw;
  }
  restore();
  return total;
}

std::vector<Block> Graph::default_blocks() const {
  std::vector<Block> out;
  for (NodeId id : topo_order_) {
    if (!nodes_[id].is_free()) continue;
    Block b;
    for (std::size_t i = 0; i < nodes_[id].dim; ++i) b.members.push_back({id, i});
    out.push_back(std::move(b));
  }
  return out;
}

void Graph::validate_blocks(std::span<const Block> blocks) const {
  std::vector<bool> seen(value_size(), false);
  for (const auto& block : blocks) {
    if (block.members.empty()) throw ModelError(ModelError::Kind::BadBlock, "empty block");
    for (const auto& m : block.members) {
      if (m.node >= nodes_.size() || m.index >= nodes_[m.node].dim) {
        throw ModelError(ModelError::Kind::BadBlock, "block member out of range");
      }
      const std::string name = component_name(m);
      if (!nodes_[m.node].is_free()) {
        throw ModelError(ModelError::Kind::BadBlock, "block member '" + name + "' is not free");
      }
      if (seen[flat_index(m)]) {
        throw ModelError(ModelError::Kind::BadBlock, "'" + name + "' appears in two blocks");
      }
      seen[flat_index(m)] = true;
    }
  }
  for (const auto& c : free_components()) {
    if (!seen[flat_index(c)]) {
      throw ModelError(ModelError::Kind::BadBlock, "'" + component_name(c) + "' is in no block");
    }
  }
}

std::vector<std::string> Graph::improper_free_nodes() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.is_free() && !n.proper && n.children.empty()) out.push_back(n.name);
  }
  return out;
}

}  // namespace dagmc
