#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "evolvekit/metamodel.hpp"
#include "evolvekit/model.hpp"

namespace evolvekit::refactor {

// Built-in metamodels. The same documents ship under builtin/.
const Metamodel& components_metamodel();
const Metamodel& statechart_metamodel();
const Metamodel& flat_statechart_metamodel();

// ---------------------------------------------------------------------------
// Components: Component{name; sub: Component*, ports: Port*}, Port{name, direction},
// association Channel Port(src) -> Port(dst).

/// Owning component of a port, or empty.
std::string owner_of(const Model& m, const std::string& portId);

/// A channel may only join ports of one component, of siblings, or of a
/// parent and its direct child.
bool channel_is_local(const Model& m, const MLink& channel);

/// Ports created by the refactorings are named `<container>/bp/<n>`.
bool is_generated_port(const std::string& portId);

/// Moves `componentId` into its sibling `containerId`, splitting channels that
/// would cross the container boundary. NOT_SIBLINGS, ID_UNKNOWN.
Model push_down(const Model& m, const std::string& componentId, const std::string& containerId);

/// Moves `componentId` up next to its container, merging channel pairs that
/// relayed its traffic through generated ports. ID_UNKNOWN, AT_ROOT.
Model pull_up(const Model& m, const std::string& componentId);

/// Removes generated ports that have no incoming or no outgoing channel.
Model collect_generated_ports(const Model& m);

using Connectivity = std::set<std::pair<std::string, std::string>>;

/// Leaf-port pairs (p, q) such that q is reachable from p through channels
/// whose intermediate ports all belong to composite components.
Connectivity flattened_connectivity(const Model& m);

// ---------------------------------------------------------------------------
// Statecharts: StateMachine{states: State*, transitions: Transition*},
// State{name, initial; substates: State*}, Transition{event}, with the
// associations TransitionSource and TransitionTarget (Transition -> State, 1..1).

/// ILLFORMED_STATECHART unless the model conforms and every state level has
/// exactly one initial state.
void validate_statechart(const Model& m);

/// Innermost-transition-wins flattening onto leaf states.
Model flatten_statechart(const Model& m);

/// Active leaf after each event; for an empty list, the initial leaf.
/// NONDETERMINISTIC when two transitions are enabled at the same depth.
std::vector<std::string> simulate(const Model& m, const std::vector<std::string>& events);

}  // namespace evolvekit::refactor
