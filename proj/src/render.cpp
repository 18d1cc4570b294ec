// Copyright 2026 The MLCI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mlci/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace mlci {

namespace {

// Ten shade levels from empty to full.
constexpr char kShades[] = " .:-=+*#%@";

char shade_char(double v) {
    int level = static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * 10.0));
    return kShades[std::min(level, 9)];
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Accrual of an augmented indicator at the final column.
double final_accrual_of(const AccrualHistory& hist, ConstraintKind kind, int index) {
    return hist.final_accrual()[hist.bit_of({kind, index})];
}

// Layout of the action rose: 3x3 of the king moves with stay in the middle.
constexpr int kRose[3][3] = {
    {kNorthWest, kNorth, kNorthEast},
    {kWest, kStay, kEast},
    {kSouthWest, kSouth, kSouthEast},
};

std::string svg_rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& extra = "") {
    return "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" width=\"" +
           format_double(w) + "\" height=\"" + format_double(h) + "\" fill=\"" + fill +
           "\"" + extra + "/>\n";
}

std::string svg_cross(double cx, double cy, double r) {
    std::string out;
    out += "<line x1=\"" + format_double(cx - r) + "\" y1=\"" + format_double(cy - r) +
           "\" x2=\"" + format_double(cx + r) + "\" y2=\"" + format_double(cy + r) +
           "\" stroke=\"red\" stroke-width=\"2\"/>\n";
    out += "<line x1=\"" + format_double(cx - r) + "\" y1=\"" + format_double(cy + r) +
           "\" x2=\"" + format_double(cx + r) + "\" y2=\"" + format_double(cy - r) +
           "\" stroke=\"red\" stroke-width=\"2\"/>\n";
    return out;
}

std::string gray_fill(double v) {
    // Bright = high accrual.
    int level = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    char buf[32];
    std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)", level, level, 40 + level / 2);
    return buf;
}

} // namespace

std::string render_ascii(const GridMeta& meta, const AccrualHistory& hist,
                         const std::vector<MinimalConstraint>& marks) {
    std::set<int> state_marks, action_marks, feature_marks;
    for (const auto& c : marks) {
        if (c.kind == ConstraintKind::State) state_marks.insert(c.index);
        if (c.kind == ConstraintKind::Action) action_marks.insert(c.index);
        if (c.kind == ConstraintKind::Feature) feature_marks.insert(c.index);
    }

    std::string out;
    out += "states (" + std::to_string(meta.width) + "x" + std::to_string(meta.height) +
           ", shade = accrual proportion, X = constraint, S = start, G = goal)\n";
    out += "+" + std::string(meta.width, '-') + "+\n";
    for (int y = meta.height - 1; y >= 0; --y) {
        out += "|";
        for (int x = 0; x < meta.width; ++x) {
            int s = y * meta.width + x;
            char c = shade_char(final_accrual_of(hist, ConstraintKind::State, s));
            if (s == meta.start_state) c = 'S';
            if (s == meta.goal_state) c = 'G';
            if (state_marks.count(s)) c = 'X';
            out += c;
        }
        out += "|\n";
    }
    out += "+" + std::string(meta.width, '-') + "+\n";

    out += "actions (rose, center = stay)\n";
    for (const auto& row : kRose) {
        out += "  ";
        for (int a : row) {
            char c = shade_char(final_accrual_of(hist, ConstraintKind::Action, a));
            if (action_marks.count(a)) c = 'X';
            out += c;
        }
        out += "\n";
    }

    out += "features\n";
    for (int i = 0; i < hist.n_native; ++i) {
        std::string name =
            i < static_cast<int>(meta.feature_names.size()) ? meta.feature_names[i]
                                                            : "f" + std::to_string(i);
        double v = final_accrual_of(hist, ConstraintKind::Feature, i);
        out += "  " + name + ": [" + shade_char(v) + "] " + format_double(v);
        if (feature_marks.count(i)) out += " X";
        out += "\n";
    }
    return out;
}

std::string render_svg(const GridMeta& meta, const AccrualHistory& hist,
                       const std::vector<MinimalConstraint>& marks) {
    const double cell = 24.0;
    const double pad = 12.0;
    const double grid_w = meta.width * cell;
    const double grid_h = meta.height * cell;
    const double rose_w = 3 * cell;
    const double features_w = 120.0;
    const double width = pad + grid_w + pad + rose_w + pad + features_w + pad;
    const double height = 2 * pad + std::max(grid_h, 6 * cell);

    std::set<int> state_marks, action_marks, feature_marks;
    for (const auto& c : marks) {
        if (c.kind == ConstraintKind::State) state_marks.insert(c.index);
        if (c.kind == ConstraintKind::Action) action_marks.insert(c.index);
        if (c.kind == ConstraintKind::Feature) feature_marks.insert(c.index);
    }

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
           "\" height=\"" + format_double(height) + "\">\n";
    out += svg_rect(0, 0, width, height, "rgb(24,24,32)");

    // States panel; row y = 0 is drawn at the bottom.
    for (int y = 0; y < meta.height; ++y) {
        for (int x = 0; x < meta.width; ++x) {
            int s = y * meta.width + x;
            double px = pad + x * cell;
            double py = pad + (meta.height - 1 - y) * cell;
            double v = final_accrual_of(hist, ConstraintKind::State, s);
            out += svg_rect(px + 1, py + 1, cell - 2, cell - 2, gray_fill(v));
            if (state_marks.count(s)) out += svg_cross(px + cell / 2, py + cell / 2, cell / 3);
        }
    }
    // Bounding boxes around color-feature cells.
    for (size_t ci = 0; ci < meta.color_states.size(); ++ci) {
        for (int s : meta.color_states[ci]) {
            int x = s % meta.width, y = s / meta.width;
            double px = pad + x * cell;
            double py = pad + (meta.height - 1 - y) * cell;
            out += svg_rect(px + 0.5, py + 0.5, cell - 1, cell - 1, "none",
                            " stroke=\"rgb(120,220,255)\" stroke-width=\"1\"");
        }
    }

    // Action rose.
    const double rose_x = pad + grid_w + pad;
    for (int ry = 0; ry < 3; ++ry) {
        for (int rx = 0; rx < 3; ++rx) {
            int a = kRose[ry][rx];
            double px = rose_x + rx * cell;
            double py = pad + ry * cell;
            double v = final_accrual_of(hist, ConstraintKind::Action, a);
            out += svg_rect(px + 1, py + 1, cell - 2, cell - 2, gray_fill(v));
            if (action_marks.count(a)) out += svg_cross(px + cell / 2, py + cell / 2, cell / 3);
        }
    }

    // Feature chips.
    const double feat_x = rose_x + rose_w + pad;
    for (int i = 0; i < hist.n_native; ++i) {
        double py = pad + i * cell;
        double v = final_accrual_of(hist, ConstraintKind::Feature, i);
        out += svg_rect(feat_x, py + 1, cell - 2, cell - 2, gray_fill(v));
        if (feature_marks.count(i))
            out += svg_cross(feat_x + (cell - 2) / 2, py + cell / 2, cell / 3);
        std::string name = i < static_cast<int>(meta.feature_names.size())
                               ? meta.feature_names[i]
                               : "f" + std::to_string(i);
        out += "<text x=\"" + format_double(feat_x + cell + 4) + "\" y=\"" +
               format_double(py + cell - 8) +
               "\" fill=\"rgb(220,220,220)\" font-size=\"12\" font-family=\"monospace\">" +
               name + "</text>\n";
    }

    out += "</svg>\n";
    return out;
}

} // namespace mlci
