#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace navstack {

enum class NodeState { Unconfigured, Inactive, Active, Finalized };
enum class Transition { Configure, Activate, Deactivate, Cleanup, Shutdown };

const char* to_string(NodeState s);
const char* to_string(Transition t);

/// Target state for a (state, transition) pair, or nullopt when the pair is
/// illegal. Shutdown is accepted from every state, including Finalized.
std::optional<NodeState> legal_target(NodeState state, Transition t);

enum class TransitionResult { Ok, Illegal, HookFailed };

/// A server with a managed lifecycle. Subclasses override the transition
/// hooks to allocate and release their resources; a hook returning false
/// rejects the transition and leaves the state unchanged.
class ManagedServer {
 public:
  explicit ManagedServer(std::string name) : name_(std::move(name)) {}
  virtual ~ManagedServer() = default;

  const std::string& name() const { return name_; }
  NodeState state() const { return state_; }
  bool is_active() const { return state_ == NodeState::Active; }

  TransitionResult request_transition(Transition t);

  /// Marks the server Finalized without running hooks. Used by the manager
  /// when a shutdown hook fails and the server must not be left dangling.
  void force_finalized() { state_ = NodeState::Finalized; }

 protected:
  virtual bool on_configure() { return true; }
  virtual bool on_activate() { return true; }
  virtual bool on_deactivate() { return true; }
  virtual bool on_cleanup() { return true; }
  virtual bool on_shutdown() { return true; }

 private:
  std::string name_;
  NodeState state_ = NodeState::Unconfigured;
};

/// Ordered bringup and reverse-order teardown over a list of servers.
class LifecycleManager {
 public:
  using Logger = std::function<void(const std::string& line)>;

  void add(ManagedServer* server) { servers_.push_back(server); }
  void set_logger(Logger logger) { logger_ = std::move(logger); }
  const std::vector<ManagedServer*>& servers() const { return servers_; }

  /// Configures every server in list order, then activates them in list
  /// order. On failure returns the failing server's name; already
  /// transitioned servers are left as they are.
  std::optional<std::string> startup();

  /// Deactivates Active servers and shuts everything down in reverse list
  /// order. Best effort: hook failures are logged and the server is
  /// finalized anyway.
  void shutdown();

 private:
  void log(const std::string& line);

  std::vector<ManagedServer*> servers_;
  Logger logger_;
};

}  // namespace navstack
