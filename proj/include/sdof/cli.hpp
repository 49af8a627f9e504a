#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sdof/geometry.hpp"
#include "sdof/imaging.hpp"
#include "sdof/mot_io.hpp"

namespace sdof::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point for `sdof <track|eval|synth|bench|overlay> ...`.
int run(int argc, char** argv);

/// Same as above with explicit streams; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Deterministic, reasonably bright color for a track id.
imaging::Rgb id_color(int id);

/// Draws 1 px box outlines, id labels and optional interest points.
void draw_overlay(imaging::RgbImage& image, const std::vector<mot_io::ResultRow>& rows,
                  const std::vector<std::pair<int, Point2>>& points);

}  // namespace sdof::cli
