#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "circflow/frank_wolfe.hpp"
#include "circflow/network.hpp"
#include "circflow/trajectories.hpp"

namespace circflow {

enum class DetectionFormat {
  MotCsv,     // frame,id,x,y,w,h,conf[,...]  -> box centre, beta = 1 - clamp(conf)
  PointsCsv,  // frame,x,y[,z]                -> beta left unset
};

std::string_view to_string(DetectionFormat format);
/// Accepts "mot-csv" and "points-csv".
DetectionFormat parse_detection_format(std::string_view text);

/// Blank lines, '#' comments and one leading header line are skipped.
/// Detection ids are data-row indices starting at 0. Malformed rows throw
/// std::invalid_argument naming `source` and the line number.
std::vector<Detection> read_detections(std::istream& in, DetectionFormat format, std::string_view source = "input");
std::vector<Detection> load_detections(const std::filesystem::path& path, DetectionFormat format);

/// `track_id,frame,detection_id,x,y[,z]`, tracks ordered by first frame then
/// first detection id, one row per detection.
void write_trajectories(std::ostream& out, const TrajectorySet& set, std::span<const Detection> detections);

/// Header `n m`, then `tail head cost kind` per arc.
void write_graph_dump(std::ostream& out, const CirculationNetwork& net);
CirculationNetwork read_graph_dump(std::istream& in, std::string_view source = "graph");

/// Flat `key = value` text with '#' comments. Duplicate keys keep the last value.
std::map<std::string, std::string> read_key_values(std::istream& in, std::string_view source = "config");

/// Sparse objective text: `arc value` sets a linear entry, `arc arc value`
/// adds a quadratic entry. Linear entries not mentioned keep `base_linear`.
QuadraticObjective read_objective(std::istream& in, std::vector<double> base_linear,
                                  std::string_view source = "objective");

}  // namespace circflow
