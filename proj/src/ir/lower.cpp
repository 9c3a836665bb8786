/*
 * Copyright 2026 The TickTalk Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ticktalk/ir/lower.hpp"

#include <algorithm>
#include <cstdio>

namespace ticktalk::ir {

LoweringError::LoweringError(SourceSpan s, const std::string& message)
    : Error(std::to_string(s.line) + ":" + std::to_string(s.column) + ": " + message), span(s) {}

namespace {

using namespace ticktalk::dsl;

struct Guard {
    std::string port;      // "?" + variable
    std::string producer;  // node computing the condition
    bool when = true;
};

/// What a variable name refers to at a program point.
struct Binding {
    enum class Kind { Node, Ambient, Literal, Unavailable };
    Kind kind = Kind::Ambient;
    std::string node;    // Node: producer id
    std::string text;    // Ambient name, literal text, or Unavailable reason
    std::string region;  // region of the defining statement
};

/// A use inside a loop body of a name that the body reassigns later; resolved
/// into a loop-back edge once the whole body has been lowered.
struct PendingLoopBack {
    std::string consumer;
    std::string port;
    std::string var;
    SourceSpan span;
};

struct LoopCtx {
    std::string id;
    std::set<std::string> assigned;
    std::vector<PendingLoopBack> pending;
};

struct ScopeCtx {
    TimingConstraint constraint;
    std::optional<SyncRequirement> sync;
    std::optional<ClockRef> clock;
};

void collect_assigned(const Block& body, std::set<std::string>& out);

void collect_assigned(const Statement& s, std::set<std::string>& out) {
    std::visit(
        [&](const auto& st) {
            using T = std::decay_t<decltype(st)>;
            if constexpr (std::is_same_v<T, AssignStmt>) {
                out.insert(st.target);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                collect_assigned(st.then_body, out);
                if (st.else_body) collect_assigned(*st.else_body, out);
            } else if constexpr (requires { st.body; }) {
                collect_assigned(st.body, out);
            }
        },
        s.node);
}

void collect_assigned(const Block& body, std::set<std::string>& out) {
    for (const auto& s : body) collect_assigned(s, out);
}

bool region_contains(const std::string& outer, const std::string& inner) {
    if (outer.empty()) return true;
    return inner == outer || inner.rfind(outer + "/", 0) == 0;
}

bool region_has_component(const std::string& region, const std::string& id) {
    std::size_t start = 0;
    while (start <= region.size()) {
        auto end = region.find('/', start);
        if (end == std::string::npos) end = region.size();
        if (region.compare(start, end - start, id) == 0) return true;
        start = end + 1;
    }
    return false;
}

class Lowerer {
public:
    DataflowGraph run(const Ast& ast) {
        for (const auto& a : ambient_names()) env_[a] = Binding{Binding::Kind::Ambient, "", a, ""};
        block(ast.statements);
        graph_.canonicalize();
        graph_.check();
        return std::move(graph_);
    }

private:
    // ---- node construction ------------------------------------------------

    GraphNode& new_node(NodeKind kind, const std::string& op) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "n%03d_", next_node_++);
        GraphNode n;
        n.kind = kind;
        n.id = std::string(buf) + op;
        n.code_block.id = n.id;
        n.code_block.op = op;
        n.region = region_;
        for (const auto& sc : scopes_) {
            n.code_block.constraints.push_back(sc.constraint);
            if (sc.sync) {
                n.firing_rule.sync.push_back(*sc.sync);
                graph_.sync_deps.push_back({n.id, sc.sync->clock, sc.sync->precision_ns});
            }
            if (sc.clock) n.code_block.clock_binding = *sc.clock;
        }
        for (const auto& g : guards_) {
            n.firing_rule.ports.push_back({g.port, Port::Kind::Guard, g.when, ""});
            graph_.data_edges.push_back({g.producer, n.id, g.port, false});
        }
        graph_.nodes.push_back(std::move(n));
        return graph_.nodes.back();
    }

    std::string temp_name() { return "%t" + std::to_string(next_temp_++); }

    void define(const std::string& var, const std::string& node_id) {
        env_[var] = Binding{Binding::Kind::Node, node_id, "", region_};
    }

    // ---- uses -------------------------------------------------------------

    /// Returns false when the node already reads this port.
    bool add_port(const std::string& node_id, const Port& port) {
        auto* n = graph_.find(node_id);
        if (n->find_port(port.name)) return false;
        n->firing_rule.ports.push_back(port);
        return true;
    }

    /// Resolves a variable read by `consumer` into an argument, adding ports
    /// and edges as needed.
    Arg use(const std::string& var, const std::string& consumer, SourceSpan span) {
        auto it = env_.find(var);
        if (it == env_.end()) throw LoweringError(span, "'" + var + "' is consumed before it is produced");
        const Binding b = it->second;
        if (b.kind == Binding::Kind::Unavailable)
            throw LoweringError(span, "'" + var + "' is not available here: " + b.text);

        LoopCtx* carrying = nullptr;
        for (auto l = loops_.rbegin(); l != loops_.rend(); ++l) {
            if (l->assigned.count(var) && !region_has_component(b.region, l->id)) {
                carrying = &*l;
                break;
            }
        }

        if (b.kind == Binding::Kind::Literal && !carrying) return {Arg::Kind::Literal, b.text};
        if (b.kind == Binding::Kind::Ambient && !carrying) return {Arg::Kind::Ambient, b.text};

        Port port{var, Port::Kind::Data, true, ""};
        if (b.kind == Binding::Kind::Node) {
            if (!region_contains(b.region, region_))
                throw LoweringError(span, "'" + var + "' is produced in another iteration scope ('" + b.region +
                                              "') and cannot be consumed here");
            if (!add_port(consumer, port)) return {Arg::Kind::Port, var};
            graph_.data_edges.push_back({b.node, consumer, var, false});
        } else {
            port.initial = b.text;
            if (!add_port(consumer, port)) return {Arg::Kind::Port, var};
        }
        if (carrying) carrying->pending.push_back({consumer, var, var, span});
        return {Arg::Kind::Port, var};
    }

    /// Lowers an effectful expression and binds its result to `target`.
    void value(const Expr& e, const std::string& target) {
        if (const auto* c = std::get_if<CallExpr>(&e.node)) {
            call(*c, target, e.span);
        } else if (const auto* s = std::get_if<SimultaneousExpr>(&e.node)) {
            set_expand(*s, target, e.span);
        } else if (const auto* id = std::get_if<IdentExpr>(&e.node)) {
            auto it = env_.find(id->name);
            if (it == env_.end()) throw LoweringError(e.span, "'" + id->name + "' is consumed before it is produced");
            env_[target] = it->second;
        } else if (const auto* lit = std::get_if<IntLiteral>(&e.node)) {
            env_[target] = Binding{Binding::Kind::Literal, "", std::to_string(lit->value), region_};
        }
    }

    std::string call(const CallExpr& c, const std::string& target, SourceSpan span) {
        // Arguments first so nested producers get smaller ids.
        std::vector<std::pair<const Expr*, std::string>> nested;
        for (const auto& a : c.args) {
            if (std::holds_alternative<CallExpr>(a.node) || std::holds_alternative<SimultaneousExpr>(a.node)) {
                const std::string tmp = temp_name();
                value(a, tmp);
                nested.emplace_back(&a, tmp);
            }
        }
        const std::string id = new_node(NodeKind::Call, c.name).id;
        std::vector<Arg> args;
        std::vector<std::string> params;
        std::size_t next_nested = 0;
        for (const auto& a : c.args) {
            Arg r;
            if (next_nested < nested.size() && nested[next_nested].first == &a) {
                r = use(nested[next_nested++].second, id, a.span);
            } else if (const auto* ident = std::get_if<IdentExpr>(&a.node)) {
                r = use(ident->name, id, a.span);
            } else {
                r = {Arg::Kind::Literal, std::to_string(std::get<IntLiteral>(a.node).value)};
            }
            if (r.kind == Arg::Kind::Literal) params.push_back(r.value);
            args.push_back(std::move(r));
        }
        auto* n = graph_.find(id);
        n->args = std::move(args);
        n->code_block.params = std::move(params);
        if (!target.empty()) {
            n->output = target;
            define(target, id);
        }
        (void)span;
        return id;
    }

    std::string set_expand(const SimultaneousExpr& s, const std::string& target, SourceSpan span) {
        const std::string id = new_node(NodeKind::SetExpand, s.method).id;
        Arg a = use(s.set, id, span);
        if (a.kind != Arg::Kind::Port)
            throw LoweringError(span, "simultaneously() needs a computed set, '" + s.set + "' is not produced by a call");
        const std::string group = "g" + std::to_string(next_group_++);
        auto* n = graph_.find(id);
        n->args = {a};
        n->code_block.constraints.push_back(Simultaneous{group});
        graph_.simultaneity_groups[group].insert(id);
        if (n->firing_rule.sync.empty())
            throw LoweringError(span, "simultaneously() must be inside a withSynchronization block");
        if (!target.empty()) {
            n->output = target;
            define(target, id);
        }
        return id;
    }

    // ---- statements -------------------------------------------------------

    void block(const Block& body) {
        const std::size_t guard_mark = guards_.size();
        for (std::size_t i = 0; i < body.size(); ++i) {
            const auto& s = body[i];
            if (std::holds_alternative<BreakStmt>(s.node)) {
                brk(s.span);
                if (i + 1 < body.size()) throw LoweringError(body[i + 1].span, "statement after 'break' is unreachable");
                continue;
            }
            if (const auto* ifs = std::get_if<IfStmt>(&s.node)) {
                if (auto g = if_stmt(*ifs, s.span)) guards_.push_back(*g);
                continue;
            }
            stmt(s);
        }
        guards_.resize(guard_mark);
    }

    void brk(SourceSpan span) {
        if (loops_.empty()) throw LoweringError(span, "'break' outside of a loop");
        new_node(NodeKind::Break, "break");
    }

    template <class Body>
    void scoped(ScopeCtx ctx, const Body& body) {
        scopes_.push_back(std::move(ctx));
        block(body);
        scopes_.pop_back();
    }

    /// Marks every name assigned in `body` as unusable after the construct.
    void seal(const Block& body, const std::string& reason) {
        std::set<std::string> assigned;
        collect_assigned(body, assigned);
        for (const auto& v : assigned) env_[v] = Binding{Binding::Kind::Unavailable, "", reason, region_};
    }

    void stmt(const Statement& s) {
        if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
            value(a->value, a->target);
        } else if (const auto* c = std::get_if<CallStmt>(&s.node)) {
            call(c->call, "", s.span);
        } else if (const auto* l = std::get_if<LoopStmt>(&s.node)) {
            loop(*l);
        } else if (const auto* sb = std::get_if<SyncBlockStmt>(&s.node)) {
            if (const auto* id = std::get_if<IdentExpr>(&sb->sensor_set.node); id && !env_.count(id->name))
                throw LoweringError(sb->sensor_set.span, "'" + id->name + "' is consumed before it is produced");
            const std::string scope = "sync" + std::to_string(next_scope_++);
            scoped(ScopeCtx{Synchronize{sb->precision.ns(), sb->clock, scope},
                            SyncRequirement{sb->clock.to_string(), sb->precision.ns()}, sb->clock},
                   sb->body);
        } else if (const auto* ev = std::get_if<EveryBlockStmt>(&s.node)) {
            const std::string scope = "every" + std::to_string(next_scope_++);
            const std::string saved = region_;
            region_ = region_.empty() ? scope : region_ + "/" + scope;
            scoped(ScopeCtx{Frequency{ev->period.ns(), scope}, std::nullopt, std::nullopt}, ev->body);
            region_ = saved;
            seal(ev->body, "it is produced inside a periodic block");
        } else if (const auto* w = std::get_if<WithinBlockStmt>(&s.node)) {
            const std::string scope = "within" + std::to_string(next_scope_++);
            scoped(ScopeCtx{Latency{w->bound.ns(), scope}, std::nullopt, std::nullopt}, w->body);
        } else if (const auto* at = std::get_if<AtBlockStmt>(&s.node)) {
            scoped(ScopeCtx{AtTime{at->instant, at->clock}, std::nullopt, at->clock}, at->body);
        } else if (const auto* ifs = std::get_if<IfStmt>(&s.node)) {
            if_stmt(*ifs, s.span);
        }
    }

    void loop(const LoopStmt& l) {
        LoopCtx ctx;
        ctx.id = "loop" + std::to_string(next_scope_++);
        collect_assigned(l.body, ctx.assigned);
        const std::string saved = region_;
        region_ = region_.empty() ? ctx.id : region_ + "/" + ctx.id;
        loops_.push_back(std::move(ctx));
        block(l.body);

        LoopCtx done = std::move(loops_.back());
        loops_.pop_back();
        for (const auto& p : done.pending) {
            const auto it = env_.find(p.var);
            if (it == env_.end() || it->second.kind == Binding::Kind::Unavailable)
                throw LoweringError(p.span, "'" + p.var + "' is not reliably produced by the end of the loop body");
            if (it->second.kind != Binding::Kind::Node)
                throw LoweringError(p.span, "loop-carried '" + p.var + "' must be produced by a call");
            graph_.data_edges.push_back({it->second.node, p.consumer, p.port, true});
        }
        region_ = saved;
        seal(l.body, "it is produced inside a loop");
    }

    /// Lowers an if statement. Returns the guard that must cover the rest of
    /// the enclosing block when one branch ends in `break`.
    std::optional<Guard> if_stmt(const IfStmt& s, SourceSpan span) {
        // Constant conditions select a branch statically.
        std::optional<bool> constant;
        if (const auto* lit = std::get_if<IntLiteral>(&s.cond.node)) constant = lit->value != 0;
        if (const auto* id = std::get_if<IdentExpr>(&s.cond.node)) {
            auto it = env_.find(id->name);
            if (it != env_.end() && it->second.kind == Binding::Kind::Literal) constant = it->second.text != "0";
            if (it != env_.end() && it->second.kind == Binding::Kind::Ambient)
                throw LoweringError(s.cond.span, "condition '" + id->name + "' must be computed by a call");
        }
        if (constant) {
            if (*constant) {
                block(s.then_body);
            } else if (s.else_body) {
                block(*s.else_body);
            }
            return std::nullopt;
        }

        std::string var;
        if (const auto* id = std::get_if<IdentExpr>(&s.cond.node)) {
            var = id->name;
        } else {
            var = "%c" + std::to_string(next_temp_++);
            value(s.cond, var);
        }
        const auto it = env_.find(var);
        if (it == env_.end() || it->second.kind != Binding::Kind::Node)
            throw LoweringError(s.cond.span, "condition '" + var + "' is not available here");
        const std::string producer = it->second.node;
        if (!region_contains(it->second.region, region_))
            throw LoweringError(s.cond.span, "condition '" + var + "' comes from another iteration scope");

        const std::string port = "?" + var;
        auto branch = [&](const Block& body, bool when) {
            const auto saved_env = env_;
            guards_.push_back({port, producer, when});
            block(body);
            guards_.pop_back();
            env_ = saved_env;
            seal(body, "it is assigned under a condition");
        };
        branch(s.then_body, true);
        if (s.else_body) branch(*s.else_body, false);

        auto ends_in_break = [](const Block& b) {
            return !b.empty() && std::holds_alternative<BreakStmt>(b.back().node);
        };
        (void)span;
        if (ends_in_break(s.then_body)) return Guard{port, producer, false};
        if (s.else_body && ends_in_break(*s.else_body)) return Guard{port, producer, true};
        return std::nullopt;
    }

    DataflowGraph graph_;
    std::map<std::string, Binding> env_;
    std::vector<Guard> guards_;
    std::vector<ScopeCtx> scopes_;
    std::vector<LoopCtx> loops_;
    std::string region_;
    int next_node_ = 0;
    int next_temp_ = 0;
    int next_group_ = 0;
    int next_scope_ = 0;
};

}  // namespace

DataflowGraph lower(const dsl::ValidatedAst& ast) { return Lowerer().run(ast.ast()); }

DataflowGraph compile_source(std::string_view source) { return lower(dsl::validate(dsl::parse_source(source))); }

std::map<std::string, std::set<std::string>> simultaneity_groups(const DataflowGraph& graph) {
    return graph.simultaneity_groups;
}

std::string instance_id(const std::string& node_id, const std::string& ensemble) {
    return node_id + "[" + ensemble + "]";
}

DataflowGraph expand(const DataflowGraph& graph, const std::map<std::string, std::vector<std::string>>& members) {
    DataflowGraph out;
    std::map<std::string, std::vector<std::string>> instances;  // set node -> instance ids
    for (const auto& n : graph.nodes) {
        auto it = members.find(n.id);
        if (n.kind != NodeKind::SetExpand || it == members.end()) {
            out.nodes.push_back(n);
            continue;
        }
        if (it->second.empty()) throw GraphError("set expansion '" + n.id + "' has no members");
        for (const auto& e : it->second) {
            GraphNode inst = n;
            inst.id = instance_id(n.id, e);
            inst.code_block.id = inst.id;
            inst.placement = e;
            inst.multiplicity = static_cast<int>(it->second.size());
            instances[n.id].push_back(inst.id);
            out.nodes.push_back(std::move(inst));
        }
    }

    auto expand_ids = [&](const std::string& id) {
        auto it = instances.find(id);
        return it == instances.end() ? std::vector<std::string>{id} : it->second;
    };

    for (const auto& e : graph.data_edges) {
        const auto producers = expand_ids(e.producer);
        const auto consumers = expand_ids(e.consumer);
        const bool gathered = instances.count(e.producer) > 0;
        for (const auto& c : consumers) {
            for (const auto& p : producers) {
                std::string port = e.port;
                if (gathered) {
                    // One port per producer instance: "A[cam1]".
                    port = e.port + p.substr(p.find('['));
                }
                out.data_edges.push_back({p, c, port, e.loop_back});
            }
        }
    }
    // Rewrite gathered consumer ports.
    for (auto& n : out.nodes) {
        std::vector<Port> ports;
        for (const auto& p : n.firing_rule.ports) {
            bool replaced = false;
            for (const auto& e : out.data_edges) {
                if (e.consumer != n.id || e.port == p.name) continue;
                if (e.port.rfind(p.name + "[", 0) == 0) {
                    Port q = p;
                    q.name = e.port;
                    if (std::none_of(ports.begin(), ports.end(), [&](const Port& x) { return x.name == q.name; }))
                        ports.push_back(q);
                    replaced = true;
                }
            }
            if (!replaced) ports.push_back(p);
        }
        n.firing_rule.ports = std::move(ports);
    }
    for (const auto& d : graph.sync_deps)
        for (const auto& id : expand_ids(d.node)) out.sync_deps.push_back({id, d.clock, d.precision_ns});
    for (const auto& [g, ms] : graph.simultaneity_groups)
        for (const auto& m : ms)
            for (const auto& id : expand_ids(m)) out.simultaneity_groups[g].insert(id);

    out.canonicalize();
    out.check();
    return out;
}

}  // namespace ticktalk::ir
