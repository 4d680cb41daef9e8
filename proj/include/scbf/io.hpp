#pragma once

#include "scbf/cbfsyn.hpp"
#include "scbf/control.hpp"
#include "scbf/robot.hpp"
#include "scbf/sdfield.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

/// JSON-syntax robot, scene, plan and CBF files plus trace persistence.
/// Lengths in meters, angles in radians, times in seconds. Every file carries
/// `"format_version": 1`. Malformed input throws scbf::ParseError with the
/// file, line and field.
namespace scbf::io {

inline constexpr int kFormatVersion = 1;

robot::RobotModel parse_robot(const std::string& text, const std::string& source = "");
sdfield::Scene parse_scene(const std::string& text, const std::string& source = "");

struct PlanFile {
  control::WaypointPlan plan;
  robot::JointConfig start;
  control::SimConfig config;  // defaults overridden by the optional "config" block
};
PlanFile parse_plan(const std::string& text, const std::string& source = "");

cbfsyn::QuadraticCBF parse_cbf(const std::string& text, const std::string& source = "");
std::string cbf_to_json(const cbfsyn::QuadraticCBF& cbf);

robot::RobotModel load_robot(const std::string& path);
sdfield::Scene load_scene(const std::string& path);
PlanFile load_plan(const std::string& path);
cbfsyn::QuadraticCBF load_cbf(const std::string& path);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_file(const std::string& path);

/// Header of the trace CSV for an n-joint robot.
std::string trace_header(int n, bool timings);
/// One row per StepRecord. Values print with round-trip precision; the timing
/// columns are left out unless requested so that seeded runs are bit-identical.
void write_trace(std::ostream& out, const std::vector<control::StepRecord>& trace, int n, bool timings = false);
void write_trace(const std::string& path, const std::vector<control::StepRecord>& trace, int n, bool timings = false);

std::string summary_to_json(const control::RunSummary& summary);

/// "q1,q2,..." -> vector. Throws ParseError on junk.
Eigen::VectorXd parse_vector(const std::string& csv, const std::string& field = "state");

}  // namespace scbf::io
