#include "scbf/sdfield.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace scbf::sdfield {

Placement Obstacle::placement_at(double t) const {
  if (schedule.size() == 1 || t <= schedule.front().t) return schedule.front().pose;
  if (t >= schedule.back().t) return schedule.back().pose;
  const auto hi = std::upper_bound(schedule.begin(), schedule.end(), t,
                                   [](double v, const Keyframe& k) { return v < k.t; });
  const auto lo = hi - 1;
  const double s = (t - lo->t) / (hi->t - lo->t);
  Placement p;
  p.translation = (1.0 - s) * lo->pose.translation + s * hi->pose.translation;
  const Eigen::Quaterniond qa(lo->pose.rotation);
  const Eigen::Quaterniond qb(hi->pose.rotation);
  p.rotation = qa.slerp(s, qb).normalized().toRotationMatrix();
  return p;
}

void Scene::add(std::string name, ConvexShape shape, const Placement& pose) {
  pose.validate();
  obstacles.push_back({std::move(name), std::move(shape), {{0.0, pose}}});
}

void Scene::add_moving(std::string name, ConvexShape shape, std::vector<Keyframe> schedule) {
  obstacles.push_back({std::move(name), std::move(shape), std::move(schedule)});
  try {
    validate();
  } catch (...) {
    obstacles.pop_back();
    throw;
  }
}

void Scene::validate() const {
  for (const auto& o : obstacles) {
    if (o.schedule.empty()) throw std::invalid_argument("obstacle '" + o.name + "' has no pose");
    for (std::size_t i = 0; i < o.schedule.size(); ++i) {
      o.schedule[i].pose.validate();
      if (i > 0 && !(o.schedule[i].t > o.schedule[i - 1].t))
        throw std::invalid_argument("obstacle '" + o.name + "' schedule times must increase");
    }
  }
}

namespace {

struct PlacedShape {
  const ConvexShape* shape;
  Placement pose;
  double bound;  // bounding-ball radius about pose.translation
  int owner;
  int index;
};

std::vector<PlacedShape> place_links(const RobotModel& model, const JointConfig& q) {
  const auto frames = robot::forward_kinematics(model, q);
  std::vector<PlacedShape> out;
  for (int i = 0; i < model.dof(); ++i) {
    const auto& link = model.links()[static_cast<std::size_t>(i)];
    for (std::size_t s = 0; s < link.shapes.size(); ++s) {
      const auto& ls = link.shapes[s];
      out.push_back({&ls.shape, frames[static_cast<std::size_t>(i)] * ls.origin, ls.shape.bounding_radius(), i,
                     static_cast<int>(s)});
    }
  }
  return out;
}

// Folds one pair into the running minimum. Bounding balls give a lower bound
// on sd, so pairs that cannot beat the current best are skipped.
void consider(const PlacedShape& a, const PlacedShape& b, SdfValue& best) {
  const double lower = (a.pose.translation - b.pose.translation).norm() - a.bound - b.bound;
  if (lower > best.distance) return;
  const auto r = geometry::signed_distance(*a.shape, a.pose, *b.shape, b.pose);
  best.converged = best.converged && r.converged;
  if (r.signed_distance < best.distance) {
    best.distance = r.signed_distance;
    best.pair = {a.owner, a.index, b.owner, b.index, r.witness_a, r.witness_b, r.normal};
  }
}

SdfValue outer_from(const std::vector<PlacedShape>& links, const Scene& scene, double t) {
  SdfValue best;
  for (std::size_t o = 0; o < scene.obstacles.size(); ++o) {
    const auto& obs = scene.obstacles[o];
    const PlacedShape ps{&obs.shape, obs.placement_at(t), obs.shape.bounding_radius(), static_cast<int>(o), 0};
    for (const auto& l : links) consider(l, ps, best);
  }
  return best;
}

SdfValue inner_from(const RobotModel& model, const std::vector<PlacedShape>& links) {
  SdfValue best;
  for (std::size_t i = 0; i < links.size(); ++i)
    for (std::size_t j = i + 1; j < links.size(); ++j) {
      if (links[i].owner == links[j].owner || model.excluded(links[i].owner, links[j].owner)) continue;
      consider(links[i], links[j], best);
    }
  return best;
}

SdfSample compose(const JointConfig& q, const SdfValue& out, const SdfValue& in) {
  SdfSample s;
  s.state = q;
  s.sd_out = out.distance;
  s.sd_in = in.distance;
  s.sd_ov = std::min(s.sd_out, s.sd_in);
  s.outer_pair = out.pair;
  s.inner_pair = in.pair;
  s.converged = out.converged && in.converged;
  return s;
}

}  // namespace

SdfValue outer_sdf(const RobotModel& model, const JointConfig& q, const Scene& scene, double t) {
  return outer_from(place_links(model, q), scene, t);
}

SdfValue inner_sdf(const RobotModel& model, const JointConfig& q) { return inner_from(model, place_links(model, q)); }

SdfSample overall_sdf(const RobotModel& model, const JointConfig& q, const Scene& scene, double t) {
  const auto links = place_links(model, q);
  return compose(q, outer_from(links, scene, t), inner_from(model, links));
}

std::vector<SdfSample> overall_sdf_batch(const RobotModel& model, const std::vector<JointConfig>& qs,
                                         const Scene& scene, double t, int threads) {
  std::vector<SdfSample> out(qs.size());
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = overall_sdf(model, qs[i], scene, t);
  };
  const std::size_t nt = static_cast<std::size_t>(std::max(1, threads));
  if (nt == 1 || qs.size() < 2 * nt) {
    work(0, qs.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (qs.size() + nt - 1) / nt;
  for (std::size_t k = 0; k < nt; ++k) {
    const std::size_t b = k * chunk;
    const std::size_t e = std::min(qs.size(), b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace scbf::sdfield
