#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "imputer/apps.hpp"

namespace imputer {

namespace {

std::vector<double> gaussian_kernel(double sigma_cells, double truncate) {
    const int radius = std::max(1, static_cast<int>(std::ceil(truncate * sigma_cells)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    for (int i = -radius; i <= radius; ++i) {
        k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * (i / sigma_cells) * (i / sigma_cells));
    }
    return k;
}

// Zero-padded 1-D convolution along one axis.
std::vector<double> convolve(const std::vector<double>& in, int nx, int ny, const std::vector<double>& k, bool along_x) {
    const int radius = static_cast<int>(k.size() / 2);
    std::vector<double> out(in.size(), 0.0);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double s = 0.0;
            for (int d = -radius; d <= radius; ++d) {
                const int jx = along_x ? ix + d : ix;
                const int jy = along_x ? iy : iy + d;
                if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
                s += k[static_cast<std::size_t>(d + radius)] * in[static_cast<std::size_t>(jy * nx + jx)];
            }
            out[static_cast<std::size_t>(iy * nx + ix)] = s;
        }
    }
    return out;
}

}  // namespace

Heatmap heatmap(std::span<const Point> positions, std::span<const AttackDirection> directions,
                const HeatmapParams& params) {
    if (positions.size() != directions.size()) throw std::invalid_argument("heatmap: size mismatch");
    if (positions.empty()) throw std::invalid_argument("heatmap: no positions");
    if (params.nx < 1 || params.ny < 1 || !(params.sigma >= 0.0)) throw std::invalid_argument("heatmap: bad params");
    Heatmap h;
    h.nx = params.nx;
    h.ny = params.ny;
    h.density.assign(static_cast<std::size_t>(h.nx * h.ny), 0.0);
    const double cw = kPitchLength / h.nx;
    const double ch = kPitchWidth / h.ny;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const Point p = to_own_goal_frame(clamp_to_pitch(positions[i]), directions[i]);
        const int ix = std::clamp(static_cast<int>(p.x / cw), 0, h.nx - 1);
        const int iy = std::clamp(static_cast<int>(p.y / ch), 0, h.ny - 1);
        h.density[static_cast<std::size_t>(iy * h.nx + ix)] += 1.0;
    }
    if (params.sigma > 0.0) {
        const auto kx = gaussian_kernel(params.sigma / cw, params.truncate);
        const auto ky = gaussian_kernel(params.sigma / ch, params.truncate);
        h.density = convolve(convolve(h.density, h.nx, h.ny, kx, true), h.nx, h.ny, ky, false);
    }
    double total = 0.0;
    for (const double v : h.density) total += v;
    for (double& v : h.density) v /= total;
    return h;
}

Heatmap uniform_heatmap(const HeatmapParams& params) {
    Heatmap h;
    h.nx = params.nx;
    h.ny = params.ny;
    h.density.assign(static_cast<std::size_t>(h.nx * h.ny), 1.0 / static_cast<double>(h.nx * h.ny));
    return h;
}

double bhattacharyya(const Heatmap& a, const Heatmap& b) {
    if (a.nx != b.nx || a.ny != b.ny) throw std::invalid_argument("bhattacharyya: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.density.size(); ++i) s += std::sqrt(a.density[i] * b.density[i]);
    return s;
}

AgentTrack agent_track(const PredictionSet& set, const MatchData& match, int agent_id) {
    AgentTrack track;
    const auto resolved = set.resolved();
    for (std::size_t t = 0; t < set.size(); ++t) {
        track.positions.push_back(resolved[t][static_cast<std::size_t>(agent_id)]);
        track.directions.push_back(match.direction_of_agent(agent_id, set.period[t]));
    }
    return track;
}

AgentTrack agent_track_truth(const MatchData& match, int agent_id) {
    AgentTrack track;
    for (const TrackingFrame& f : match.tracking) {
        track.positions.push_back(f.positions[static_cast<std::size_t>(agent_id)]);
        track.directions.push_back(match.direction_of_agent(agent_id, f.t < match.period_start[1] ? 1 : 2));
    }
    return track;
}

std::string heatmap_pgm(const Heatmap& map) {
    const double peak = *std::max_element(map.density.begin(), map.density.end());
    std::string out = "P5\n" + std::to_string(map.nx) + " " + std::to_string(map.ny) + "\n255\n";
    // image rows run top to bottom, so flip y
    for (int iy = map.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < map.nx; ++ix) {
            const double v = peak > 0.0 ? map.density[static_cast<std::size_t>(iy * map.nx + ix)] / peak : 0.0;
            out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - v)))));
        }
    }
    return out;
}

}  // namespace imputer
