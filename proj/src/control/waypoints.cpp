#include "scbf/control.hpp"

#include <stdexcept>
#include <string>

namespace scbf::control {

void WaypointPlan::validate(int dof) const {
  if (waypoints.empty()) throw std::invalid_argument("plan needs at least one waypoint");
  for (std::size_t i = 0; i < waypoints.size(); ++i)
    if (waypoints[i].size() != dof)
      throw std::invalid_argument("waypoint " + std::to_string(i) + " has " + std::to_string(waypoints[i].size()) +
                                  " values, robot has " + std::to_string(dof) + " joints");
  if (!(gain > 0.0)) throw std::invalid_argument("plan gain must be positive");
  if (!(switch_radius > 0.0)) throw std::invalid_argument("plan switch_radius must be positive");
  if (stall_window < 1) throw std::invalid_argument("plan stall_window must be at least 1");
  if (!(stall_eps > 0.0)) throw std::invalid_argument("plan stall_eps must be positive");
}

WaypointTracker::WaypointTracker(WaypointPlan plan) : plan_(std::move(plan)) {}

void WaypointTracker::advance() {
  history_.clear();
  if (active_ + 1 < static_cast<int>(plan_.waypoints.size())) {
    ++active_;
  } else {
    finished_ = true;
  }
}

Eigen::VectorXd WaypointTracker::desired_input(const JointConfig& x, const Box& bounds) {
  const JointConfig& w = plan_.waypoints[static_cast<std::size_t>(active_)];
  const Eigen::VectorXd u = bounds.clamp(plan_.gain * (w - x));
  if (!finished_ && (w - x).norm() <= plan_.switch_radius) advance();
  return u;
}

void WaypointTracker::observe(const JointConfig& x) {
  if (finished_) return;
  history_.push_back(x);
  if (static_cast<int>(history_.size()) <= plan_.stall_window) return;
  const double progress = (x - history_.front()).norm();
  history_.pop_front();
  const bool last = active_ + 1 == static_cast<int>(plan_.waypoints.size());
  if (progress < plan_.stall_eps && !last) advance();
}

}  // namespace scbf::control
