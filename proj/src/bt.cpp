#include "navstack/bt.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <sstream>

#include "navstack/error.hpp"

namespace navstack {

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Idle: return "idle";
    case NodeStatus::Running: return "running";
    case NodeStatus::Success: return "success";
    case NodeStatus::Failure: return "failure";
  }
  return "?";
}

std::string BTNode::name() const {
  switch (kind_) {
    case NodeKind::Sequence: return "Sequence";
    case NodeKind::ReactiveSequence: return "ReactiveSequence";
    case NodeKind::Fallback: return "Fallback";
    case NodeKind::RoundRobin: return "RoundRobin";
    case NodeKind::RateController: return "RateController";
    case NodeKind::Action: return "Action";
  }
  return "?";
}

NodeStatus SequenceNode::do_tick(TickContext& ctx) {
  while (index_ < children_.size()) {
    const NodeStatus st = children_[index_]->tick(ctx);
    if (st == NodeStatus::Running) {
      return NodeStatus::Running;
    }
    if (st == NodeStatus::Failure) {
      index_ = 0;
      return NodeStatus::Failure;
    }
    ++index_;
  }
  index_ = 0;
  return NodeStatus::Success;
}

NodeStatus ReactiveSequenceNode::do_tick(TickContext& ctx) {
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const NodeStatus st = children_[i]->tick(ctx);
    if (st == NodeStatus::Running || st == NodeStatus::Failure) {
      for (std::size_t j = i + 1; j < children_.size(); ++j) {
        if (children_[j]->status() != NodeStatus::Idle) {
          children_[j]->halt();
        }
      }
      return st;
    }
  }
  return NodeStatus::Success;
}

NodeStatus FallbackNode::do_tick(TickContext& ctx) {
  while (index_ < children_.size()) {
    const NodeStatus st = children_[index_]->tick(ctx);
    if (st == NodeStatus::Running) {
      return NodeStatus::Running;
    }
    if (st == NodeStatus::Success) {
      index_ = 0;
      return NodeStatus::Success;
    }
    ++index_;
  }
  index_ = 0;
  return NodeStatus::Failure;
}

NodeStatus RoundRobinNode::do_tick(TickContext& ctx) {
  const std::size_t n = children_.size();
  if (n == 0) {
    return NodeStatus::Failure;
  }
  if (!active_) {
    // Fresh activation starts at the rotation index.
    active_ = true;
    current_ = rotation_;
    tried_ = 0;
  }
  while (tried_ < n) {
    const NodeStatus st = children_[current_]->tick(ctx);
    if (st == NodeStatus::Running) {
      return NodeStatus::Running;
    }
    if (st == NodeStatus::Success) {
      rotation_ = (current_ + 1) % n;
      active_ = false;
      return NodeStatus::Success;
    }
    ++tried_;
    current_ = (current_ + 1) % n;
  }
  rotation_ = current_;
  active_ = false;
  return NodeStatus::Failure;
}

RateControllerNode::RateControllerNode(double hz) : BTNode(NodeKind::RateController), hz_(hz) {
  if (!(hz > 0.0) || !std::isfinite(hz)) {
    throw NavError(ErrorCode::ParseError, "RateController hz must be positive");
  }
  period_ = from_seconds(1.0 / hz);
}

NodeStatus RateControllerNode::do_tick(TickContext& ctx) {
  BTNode& child = *children_.front();
  const bool due = !primed_ || (ctx.now - last_child_tick_) >= period_;
  if (due) {
    primed_ = true;
    last_child_tick_ = ctx.now;
    const NodeStatus st = child.tick(ctx);
    if (st == NodeStatus::Success || st == NodeStatus::Failure) {
      last_terminal_ = st;
    }
    return st;
  }
  // A live child cannot be masked by a stale terminal status.
  if (child.status() == NodeStatus::Running) {
    return NodeStatus::Running;
  }
  if (last_terminal_ == NodeStatus::Success || last_terminal_ == NodeStatus::Failure) {
    return last_terminal_;
  }
  return NodeStatus::Running;
}

std::unique_ptr<BTNode> ActionRegistry::make(const std::string& name,
                                             const ParamMap& params) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    throw NavError(ErrorCode::UnknownAction, name);
  }
  return it->second(params);
}

const std::vector<std::string>& known_action_tags() {
  static const std::vector<std::string> tags = {
      "ComputePathToPose", "FollowPath", "ClearCostmap", "Spin", "Wait"};
  return tags;
}

namespace {

bool is_known_action_tag(const std::string& tag) {
  for (const auto& t : known_action_tags()) {
    if (t == tag) return true;
  }
  return false;
}

std::unique_ptr<BTNode> build_node(const std::string& tag,
                                   const boost::property_tree::ptree& elem,
                                   const ActionRegistry& registry, int& count);

void build_children(BTNode& node, const boost::property_tree::ptree& elem,
                    const ActionRegistry& registry, int& count) {
  for (const auto& [key, child] : elem) {
    if (key == "<xmlattr>" || key == "<xmlcomment>" || key == "<xmltext>") continue;
    node.add_child(build_node(key, child, registry, count));
  }
}

ParamMap attributes(const boost::property_tree::ptree& elem) {
  ParamMap params;
  if (auto attrs = elem.get_child_optional("<xmlattr>")) {
    for (const auto& [key, value] : *attrs) {
      params[key] = value.data();
    }
  }
  return params;
}

std::unique_ptr<BTNode> build_node(const std::string& tag,
                                   const boost::property_tree::ptree& elem,
                                   const ActionRegistry& registry, int& count) {
  std::unique_ptr<BTNode> node;
  if (tag == "Sequence") {
    node = std::make_unique<SequenceNode>();
  } else if (tag == "ReactiveSequence") {
    node = std::make_unique<ReactiveSequenceNode>();
  } else if (tag == "Fallback") {
    node = std::make_unique<FallbackNode>();
  } else if (tag == "RoundRobin") {
    node = std::make_unique<RoundRobinNode>();
  } else if (tag == "RateController") {
    const ParamMap params = attributes(elem);
    auto it = params.find("hz");
    if (it == params.end()) {
      throw NavError(ErrorCode::ParseError, "RateController requires hz");
    }
    double hz = 0.0;
    try {
      hz = std::stod(it->second);
    } catch (const std::exception&) {
      throw NavError(ErrorCode::ParseError, "RateController hz not a number");
    }
    node = std::make_unique<RateControllerNode>(hz);
  } else if (registry.contains(tag)) {
    node = registry.make(tag, attributes(elem));
  } else if (is_known_action_tag(tag)) {
    throw NavError(ErrorCode::UnknownAction, tag);
  } else {
    throw NavError(ErrorCode::ParseError, tag);
  }
  ++count;

  if (node->kind() == NodeKind::Action) {
    for (const auto& [key, child] : elem) {
      if (key != "<xmlattr>" && key != "<xmlcomment>" && key != "<xmltext>") {
        throw NavError(ErrorCode::ParseError, tag + " cannot have children");
      }
    }
    return node;
  }
  build_children(*node, elem, registry, count);
  const std::size_t n = node->children().size();
  if (node->kind() == NodeKind::RateController && n != 1) {
    throw NavError(ErrorCode::ParseError, "RateController requires exactly one child");
  }
  if (node->kind() != NodeKind::RateController && n == 0) {
    throw NavError(ErrorCode::ParseError, tag + " requires at least one child");
  }
  return node;
}

}  // namespace

TreeSpec parse_tree(const std::string& xml_text, const ActionRegistry& registry) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  std::istringstream stream(xml_text);
  try {
    pt::read_xml(stream, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw NavError(ErrorCode::ParseError, e.what());
  }

  const pt::ptree* root_elem = nullptr;
  int top_elements = 0;
  for (const auto& [key, child] : doc) {
    if (key == "<xmlcomment>") continue;
    ++top_elements;
    if (key != "Root") {
      throw NavError(ErrorCode::ParseError, "document element must be Root");
    }
    root_elem = &child;
  }
  if (top_elements != 1 || root_elem == nullptr) {
    throw NavError(ErrorCode::ParseError, "exactly one Root element required");
  }

  TreeSpec spec;
  spec.source = xml_text;
  int child_count = 0;
  for (const auto& [key, child] : *root_elem) {
    if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
    ++child_count;
    if (child_count > 1) {
      throw NavError(ErrorCode::ParseError, "Root must contain exactly one node");
    }
    spec.root = build_node(key, child, registry, spec.node_count);
  }
  if (!spec.root) {
    throw NavError(ErrorCode::ParseError, "Root is empty");
  }
  return spec;
}

Navigator::Navigator(TreeSpec tree, std::shared_ptr<Blackboard> blackboard,
                     NavigatorParams params)
    : tree_(std::move(tree)), blackboard_(std::move(blackboard)), params_(params) {}

void Navigator::set_goal_validator(std::function<bool(const Pose2D&)> validator) {
  goal_validator_ = std::move(validator);
}

void Navigator::set_distance_provider(std::function<double()> provider) {
  distance_provider_ = std::move(provider);
}

std::uint64_t Navigator::counter(const char* key) const {
  return blackboard_->get_or<std::uint64_t>(key, 0);
}

bool Navigator::begin(const Pose2D& goal, SimTime now) {
  if (goal_validator_ && !goal_validator_(goal)) {
    result_ = NavResult{NavOutcome::Rejected, {}};
    active_ = false;
    return false;
  }
  tree_.root->halt();
  blackboard_->set(bb::kGoal, goal);
  blackboard_->set(bb::kGoalReached, false);
  blackboard_->erase(bb::kPath);
  blackboard_->erase(bb::kGoalOccupiedSince);
  active_ = true;
  started_ = now;
  distance_at_start_ = distance_provider_ ? distance_provider_() : 0.0;
  recoveries_at_start_ = counter(bb::kRecoveries);
  clears_at_start_ = counter(bb::kRecoveryClears);
  spins_at_start_ = counter(bb::kRecoverySpins);
  waits_at_start_ = counter(bb::kRecoveryWaits);
  recoveries_at_last_plan_ = recoveries_at_start_;
  plan_successes_seen_ = counter(bb::kPlanSuccesses);
  return true;
}

void Navigator::finish(NavOutcome outcome, SimTime now) {
  tree_.root->halt();
  NavStats stats;
  stats.recoveries_total = counter(bb::kRecoveries) - recoveries_at_start_;
  stats.clears = counter(bb::kRecoveryClears) - clears_at_start_;
  stats.spins = counter(bb::kRecoverySpins) - spins_at_start_;
  stats.waits = counter(bb::kRecoveryWaits) - waits_at_start_;
  stats.duration_sec = to_seconds(now - started_);
  stats.distance_m =
      (distance_provider_ ? distance_provider_() : 0.0) - distance_at_start_;
  result_ = NavResult{outcome, stats};
  active_ = false;
}

Navigator::Step Navigator::tick(SimTime now) {
  if (!active_) {
    return result_.outcome == NavOutcome::Succeeded ? Step::Succeeded : Step::Aborted;
  }
  TickContext ctx{*blackboard_, now};
  const NodeStatus root_status = tree_.root->tick(ctx);

  if (blackboard_->get_or<bool>(bb::kGoalReached, false)) {
    finish(NavOutcome::Succeeded, now);
    return Step::Succeeded;
  }
  if (root_status == NodeStatus::Failure) {
    finish(NavOutcome::Aborted, now);
    return Step::Aborted;
  }

  // Recovery exhaustion: a full ladder worth of recoveries without a single
  // successful plan means the task is hopeless.
  const std::uint64_t plans = counter(bb::kPlanSuccesses);
  if (plans > plan_successes_seen_) {
    plan_successes_seen_ = plans;
    recoveries_at_last_plan_ = counter(bb::kRecoveries);
  }
  const std::uint64_t ladder =
      static_cast<std::uint64_t>(params_.max_recovery_rounds) * 3;
  if (counter(bb::kRecoveries) - recoveries_at_last_plan_ >= ladder) {
    finish(NavOutcome::Aborted, now);
    return Step::Aborted;
  }
  return Step::Running;
}

void Navigator::cancel(SimTime now) {
  if (active_) {
    finish(NavOutcome::Aborted, now);
  }
}

}  // namespace navstack
