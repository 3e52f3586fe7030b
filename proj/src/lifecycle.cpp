#include "navstack/lifecycle.hpp"

namespace navstack {

const char* to_string(NodeState s) {
  switch (s) {
    case NodeState::Unconfigured: return "unconfigured";
    case NodeState::Inactive: return "inactive";
    case NodeState::Active: return "active";
    case NodeState::Finalized: return "finalized";
  }
  return "?";
}

const char* to_string(Transition t) {
  switch (t) {
    case Transition::Configure: return "configure";
    case Transition::Activate: return "activate";
    case Transition::Deactivate: return "deactivate";
    case Transition::Cleanup: return "cleanup";
    case Transition::Shutdown: return "shutdown";
  }
  return "?";
}

std::optional<NodeState> legal_target(NodeState state, Transition t) {
  switch (t) {
    case Transition::Configure:
      if (state == NodeState::Unconfigured) return NodeState::Inactive;
      return std::nullopt;
    case Transition::Activate:
      if (state == NodeState::Inactive) return NodeState::Active;
      return std::nullopt;
    case Transition::Deactivate:
      if (state == NodeState::Active) return NodeState::Inactive;
      return std::nullopt;
    case Transition::Cleanup:
      if (state == NodeState::Inactive) return NodeState::Unconfigured;
      return std::nullopt;
    case Transition::Shutdown:
      return NodeState::Finalized;
  }
  return std::nullopt;
}

TransitionResult ManagedServer::request_transition(Transition t) {
  // Shutdown on an already finalized server is an accepted no-op.
  if (state_ == NodeState::Finalized) {
    return t == Transition::Shutdown ? TransitionResult::Ok : TransitionResult::Illegal;
  }
  const auto target = legal_target(state_, t);
  if (!target) {
    return TransitionResult::Illegal;
  }
  bool ok = false;
  switch (t) {
    case Transition::Configure: ok = on_configure(); break;
    case Transition::Activate: ok = on_activate(); break;
    case Transition::Deactivate: ok = on_deactivate(); break;
    case Transition::Cleanup: ok = on_cleanup(); break;
    case Transition::Shutdown: ok = on_shutdown(); break;
  }
  if (!ok) {
    return TransitionResult::HookFailed;
  }
  state_ = *target;
  return TransitionResult::Ok;
}

std::optional<std::string> LifecycleManager::startup() {
  for (ManagedServer* s : servers_) {
    if (s->request_transition(Transition::Configure) != TransitionResult::Ok) {
      log("bringup failed: " + s->name() + " did not configure");
      return s->name();
    }
    log(s->name() + ": configure -> " + to_string(s->state()));
  }
  for (ManagedServer* s : servers_) {
    if (s->request_transition(Transition::Activate) != TransitionResult::Ok) {
      log("bringup failed: " + s->name() + " did not activate");
      return s->name();
    }
    log(s->name() + ": activate -> " + to_string(s->state()));
  }
  return std::nullopt;
}

void LifecycleManager::shutdown() {
  for (auto it = servers_.rbegin(); it != servers_.rend(); ++it) {
    ManagedServer* s = *it;
    if (s->state() == NodeState::Finalized) {
      continue;
    }
    if (s->state() == NodeState::Active) {
      if (s->request_transition(Transition::Deactivate) != TransitionResult::Ok) {
        log(s->name() + ": deactivate hook failed, continuing");
      } else {
        log(s->name() + ": deactivate -> " + to_string(s->state()));
      }
    }
    if (s->request_transition(Transition::Shutdown) != TransitionResult::Ok) {
      log(s->name() + ": shutdown hook failed, finalizing anyway");
      s->force_finalized();
    } else {
      log(s->name() + ": shutdown -> " + to_string(s->state()));
    }
  }
}

void LifecycleManager::log(const std::string& line) {
  if (logger_) {
    logger_(line);
  }
}

}  // namespace navstack
