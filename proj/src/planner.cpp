#include "asg/planner.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

namespace asg {

using jsonutil::json;
using jsonutil::ordered_json;

// ---------------------------------------------------------------------------
// CoverageMap
// ---------------------------------------------------------------------------

CoverageMap::CoverageMap(const Vec3& lo, const Vec3& hi, double resolution)
    : origin_(lo), res_(resolution) {
    nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / res_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / res_)));
    nz_ = std::max(1, static_cast<int>(std::ceil((hi.z() - lo.z()) / res_)));
    state_.assign(static_cast<size_t>(voxelCount()), 0);
    label_.assign(static_cast<size_t>(voxelCount()), kNoLabel);
}

CoverageMap CoverageMap::forWorld(const WorldSpec& world, double resolution) {
    Vec3 lo, hi;
    world.bounds(lo, hi);
    // Always cover the camera workspace even in worlds without tall geometry.
    hi.z() = std::max(hi.z(), world.floor_z + 2.0);
    return CoverageMap(lo, hi, resolution);
}

std::optional<std::int64_t> CoverageMap::voxelAt(const Vec3& p) const {
    const int ix = static_cast<int>(std::floor((p.x() - origin_.x()) / res_));
    const int iy = static_cast<int>(std::floor((p.y() - origin_.y()) / res_));
    const int iz = static_cast<int>(std::floor((p.z() - origin_.z()) / res_));
    if (!inBounds(ix, iy, iz)) return std::nullopt;
    return linear(ix, iy, iz);
}

Vec3 CoverageMap::voxelCenter(std::int64_t idx) const {
    const auto [ix, iy, iz] = voxelCoords(idx);
    return origin_ + Vec3((ix + 0.5) * res_, (iy + 0.5) * res_, (iz + 0.5) * res_);
}

std::tuple<int, int, int> CoverageMap::voxelCoords(std::int64_t idx) const {
    const int ix = static_cast<int>(idx % nx_);
    const int iy = static_cast<int>((idx / nx_) % ny_);
    const int iz = static_cast<int>(idx / (static_cast<std::int64_t>(nx_) * ny_));
    return {ix, iy, iz};
}

void CoverageMap::markFree(std::int64_t idx) {
    auto& s = state_[static_cast<size_t>(idx)];
    if (s == static_cast<std::uint8_t>(State::unknown)) s = static_cast<std::uint8_t>(State::free);
}

void CoverageMap::markOccupied(std::int64_t idx, std::uint16_t label_id) {
    auto& s = state_[static_cast<size_t>(idx)];
    if (s == static_cast<std::uint8_t>(State::occupied)) return; // first label wins
    s = static_cast<std::uint8_t>(State::occupied);
    label_[static_cast<size_t>(idx)] = label_id;
}

double CoverageMap::fractionUnknown() const {
    std::int64_t unknown = 0;
    for (auto s : state_) unknown += (s == 0);
    return static_cast<double>(unknown) / static_cast<double>(voxelCount());
}

std::uint16_t CoverageMap::labelId(const std::string& label) {
    auto it = label_index_.find(label);
    if (it != label_index_.end()) return it->second;
    const auto id = static_cast<std::uint16_t>(label_table_.size());
    label_table_.push_back(label);
    label_index_.emplace(label, id);
    return id;
}

std::optional<std::uint16_t> CoverageMap::findLabelId(const std::string& label) const {
    auto it = label_index_.find(label);
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
}

const std::string& CoverageMap::labelName(std::uint16_t id) const {
    return label_table_[static_cast<size_t>(id)];
}

void CoverageMap::traverse(const Vec3& origin, const Vec3& dir, double t_end,
                           const std::function<bool(std::int64_t, double)>& visit) const {
    const Vec3 lo = origin_;
    const Vec3 hi = origin_ + Vec3(nx_ * res_, ny_ * res_, nz_ * res_);

    double t0 = 0.0, t1 = t_end;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dir[a]) < 1e-15) {
            if (origin[a] < lo[a] || origin[a] > hi[a]) return;
            continue;
        }
        double ta = (lo[a] - origin[a]) / dir[a];
        double tb = (hi[a] - origin[a]) / dir[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return;
    }

    double t = t0;
    const Vec3 start = origin + (t + 1e-9) * dir;
    int ix = std::clamp(static_cast<int>(std::floor((start.x() - origin_.x()) / res_)), 0, nx_ - 1);
    int iy = std::clamp(static_cast<int>(std::floor((start.y() - origin_.y()) / res_)), 0, ny_ - 1);
    int iz = std::clamp(static_cast<int>(std::floor((start.z() - origin_.z()) / res_)), 0, nz_ - 1);

    const int step_x = dir.x() > 0 ? 1 : -1;
    const int step_y = dir.y() > 0 ? 1 : -1;
    const int step_z = dir.z() > 0 ? 1 : -1;
    auto boundary = [&](int i, int step, double o) { return o + (i + (step > 0 ? 1 : 0)) * res_; };
    const double inf = std::numeric_limits<double>::infinity();
    double t_max_x = std::abs(dir.x()) < 1e-15
                         ? inf
                         : (boundary(ix, step_x, origin_.x()) - origin.x()) / dir.x();
    double t_max_y = std::abs(dir.y()) < 1e-15
                         ? inf
                         : (boundary(iy, step_y, origin_.y()) - origin.y()) / dir.y();
    double t_max_z = std::abs(dir.z()) < 1e-15
                         ? inf
                         : (boundary(iz, step_z, origin_.z()) - origin.z()) / dir.z();
    const double t_delta_x = std::abs(dir.x()) < 1e-15 ? inf : res_ / std::abs(dir.x());
    const double t_delta_y = std::abs(dir.y()) < 1e-15 ? inf : res_ / std::abs(dir.y());
    const double t_delta_z = std::abs(dir.z()) < 1e-15 ? inf : res_ / std::abs(dir.z());

    while (t <= t1 + 1e-12) {
        if (!visit(linear(ix, iy, iz), t)) return;
        if (t_max_x <= t_max_y && t_max_x <= t_max_z) {
            t = t_max_x;
            t_max_x += t_delta_x;
            ix += step_x;
            if (ix < 0 || ix >= nx_) return;
        } else if (t_max_y <= t_max_z) {
            t = t_max_y;
            t_max_y += t_delta_y;
            iy += step_y;
            if (iy < 0 || iy >= ny_) return;
        } else {
            t = t_max_z;
            t_max_z += t_delta_z;
            iz += step_z;
            if (iz < 0 || iz >= nz_) return;
        }
    }
}

void updateCoverage(CoverageMap& cov, const SimulatedFrame& frame, const Pose& pose,
                    double max_range) {
    for (int v = 0; v < frame.rows; ++v) {
        for (int u = 0; u < frame.cols; ++u) {
            const auto& px = frame.at(u, v);
            const Vec3 dir = pose.rotate(frame.rayDirCamera(u, v));
            const bool has_hit = px.tag >= 0 && px.depth <= max_range;
            const double t_end = has_hit ? px.depth : max_range;
            std::optional<std::int64_t> hit_voxel;
            if (has_hit) hit_voxel = cov.voxelAt(pose.translation + px.depth * dir);
            cov.traverse(pose.translation, dir, t_end, [&](std::int64_t idx, double) {
                if (!(hit_voxel && idx == *hit_voxel)) cov.markFree(idx);
                return true;
            });
            if (hit_voxel) cov.markOccupied(*hit_voxel, cov.labelId(frame.tags[px.tag].label));
        }
    }
}

// ---------------------------------------------------------------------------
// Candidate generation
// ---------------------------------------------------------------------------

namespace {

bool columnKnownFree(const CoverageMap& cov, const Vec2& xy, double floor_z,
                     const PlannerConfig& cfg) {
    for (double z = floor_z + 1.5 * cov.resolution(); z <= floor_z + cfg.camera_height + 1e-9;
         z += cov.resolution()) {
        const auto idx = cov.voxelAt(Vec3(xy.x(), xy.y(), z));
        if (!idx || cov.state(*idx) != CoverageMap::State::free) return false;
    }
    return true;
}

} // namespace

std::vector<Candidate> generateCandidates(const CoverageMap& cov, const NavGrid& nav, int current_cx,
                                          int current_cy, double floor_z, const PlannerConfig& cfg) {
    if (!nav.navigable(current_cx, current_cy))
        throw NoCandidatesError("current cell is not navigable");

    // BFS over navigable cells whose column is known free; the robot's own
    // cell is traversable by virtue of being occupied by the robot.
    std::vector<int> dist(static_cast<size_t>(nav.cols) * nav.rows, -1);
    auto at = [&](int cx, int cy) -> int& { return dist[static_cast<size_t>(cy) * nav.cols + cx]; };
    std::deque<std::pair<int, int>> queue;
    at(current_cx, current_cy) = 0;
    queue.emplace_back(current_cx, current_cy);
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        for (int k = 0; k < 4; ++k) {
            const int nx = cx + dx[k], ny = cy + dy[k];
            if (!nav.navigable(nx, ny) || at(nx, ny) >= 0) continue;
            if (!columnKnownFree(cov, nav.cellCenter(nx, ny), floor_z, cfg)) continue;
            at(nx, ny) = at(cx, cy) + 1;
            queue.emplace_back(nx, ny);
        }
    }

    std::vector<Candidate> out;
    for (int cy = 0; cy < nav.rows; ++cy) {
        for (int cx = 0; cx < nav.cols; ++cx) {
            if (at(cx, cy) < 0) continue;
            const Vec2 c = nav.cellCenter(cx, cy);
            for (int k = 0; k < cfg.yaw_bins; ++k) {
                Viewpoint vp;
                vp.cell_x = cx;
                vp.cell_y = cy;
                vp.yaw_bin = k;
                vp.position = Vec3(c.x(), c.y(), floor_z + cfg.camera_height);
                vp.yaw = 2.0 * M_PI * k / cfg.yaw_bins;
                out.push_back({vp, at(cx, cy)});
            }
        }
    }
    if (out.empty()) throw NoCandidatesError("no reachable candidates");
    return out;
}

// ---------------------------------------------------------------------------
// CompletionPrior
// ---------------------------------------------------------------------------

int CompletionPrior::indexOf(const std::string& label) const {
    for (size_t i = 0; i < vocabulary.size(); ++i)
        if (vocabulary[i] == label) return static_cast<int>(i);
    return -1;
}

CompletionPrior CompletionPrior::uniform(const std::vector<std::string>& vocab, double rate,
                                         const Vec3& half) {
    CompletionPrior prior;
    prior.vocabulary = vocab;
    prior.rates.assign(vocab.size(), rate);
    prior.cooc.assign(vocab.size(), std::vector<double>(vocab.size(), 1.0));
    prior.sizes.assign(vocab.size(), half);
    return prior;
}

void CompletionPrior::validate() const {
    const size_t n = vocabulary.size();
    if (rates.size() != n) throw ValidationError("prior.rates: size mismatch");
    if (cooc.size() != n) throw ValidationError("prior.cooc: size mismatch");
    if (sizes.size() != n) throw ValidationError("prior.sizes: size mismatch");
    for (size_t i = 0; i < n; ++i) {
        if (rates[i] < 0.0 || rates[i] > 1.0)
            throw ValidationError("prior.rates[" + std::to_string(i) + "]: must be in [0, 1]");
        if (cooc[i].size() != n) throw ValidationError("prior.cooc: row size mismatch");
        for (double w : cooc[i])
            if (w < 0.0) throw ValidationError("prior.cooc: negative weight");
        if (sizes[i].minCoeff() <= 0.0)
            throw ValidationError("prior.sizes[" + std::to_string(i) + "]: must be positive");
    }
}

CompletionPrior loadPrior(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("prior: cannot open \"" + path + "\"");
    std::stringstream buf;
    buf << in.rdbuf();
    json root;
    try {
        root = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("prior: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("prior: top level must be an object");
    jsonutil::rejectUnknownKeys(root, "prior", {"vocabulary", "rates", "cooc", "sizes"});
    CompletionPrior prior;
    for (const auto& v : jsonutil::require(root, "prior", "vocabulary"))
        prior.vocabulary.push_back(jsonutil::asString(v, "prior.vocabulary"));
    for (const auto& v : jsonutil::require(root, "prior", "rates"))
        prior.rates.push_back(jsonutil::asNumber(v, "prior.rates"));
    for (const auto& row : jsonutil::require(root, "prior", "cooc")) {
        std::vector<double> r;
        for (const auto& v : row) r.push_back(jsonutil::asNumber(v, "prior.cooc"));
        prior.cooc.push_back(std::move(r));
    }
    for (const auto& v : jsonutil::require(root, "prior", "sizes"))
        prior.sizes.push_back(jsonutil::asVec3(v, "prior.sizes"));
    prior.validate();
    return prior;
}

std::string priorToJsonText(const CompletionPrior& prior) {
    ordered_json root;
    root["vocabulary"] = prior.vocabulary;
    root["rates"] = prior.rates;
    root["cooc"] = prior.cooc;
    root["sizes"] = ordered_json::array();
    for (const auto& s : prior.sizes) root["sizes"].push_back(jsonutil::vec3ToJson(s));
    return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Completion sampling
// ---------------------------------------------------------------------------

std::vector<UnknownCluster> findUnknownClusters(const CoverageMap& cov, double floor_z,
                                                const PlannerConfig& cfg,
                                                const SceneGraph* conditioning) {
    const double res = cov.resolution();
    const double z_lo = floor_z + 1e-9;
    const double z_hi = floor_z + cfg.phantom_z_cap;
    auto inBand = [&](std::int64_t idx) {
        const double cz = cov.voxelCenter(idx).z();
        return cz > z_lo && cz <= z_hi;
    };

    std::vector<std::uint8_t> seen(static_cast<size_t>(cov.voxelCount()), 0);
    std::vector<UnknownCluster> clusters;
    for (std::int64_t seed = 0; seed < cov.voxelCount(); ++seed) {
        if (seen[static_cast<size_t>(seed)] || cov.state(seed) != CoverageMap::State::unknown ||
            !inBand(seed))
            continue;
        UnknownCluster cluster;
        Vec3 bb_lo(1e18, 1e18, 1e18), bb_hi(-1e18, -1e18, -1e18);
        std::deque<std::int64_t> queue{seed};
        seen[static_cast<size_t>(seed)] = 1;
        while (!queue.empty()) {
            const std::int64_t idx = queue.front();
            queue.pop_front();
            cluster.voxels.push_back(idx);
            const Vec3 c = cov.voxelCenter(idx);
            bb_lo = bb_lo.cwiseMin(c);
            bb_hi = bb_hi.cwiseMax(c);
            const auto [ix, iy, iz] = cov.voxelCoords(idx);
            const int nbr[6][3] = {{ix + 1, iy, iz}, {ix - 1, iy, iz}, {ix, iy + 1, iz},
                                   {ix, iy - 1, iz}, {ix, iy, iz + 1}, {ix, iy, iz - 1}};
            for (const auto& n : nbr) {
                if (!cov.inBounds(n[0], n[1], n[2])) continue;
                const std::int64_t nidx = cov.linear(n[0], n[1], n[2]);
                if (seen[static_cast<size_t>(nidx)] ||
                    cov.state(nidx) != CoverageMap::State::unknown || !inBand(nidx))
                    continue;
                seen[static_cast<size_t>(nidx)] = 1;
                queue.push_back(nidx);
            }
        }
        cluster.volume = static_cast<double>(cluster.voxels.size()) * res * res * res;

        if (conditioning) {
            const size_t stride = std::max<size_t>(1, cluster.voxels.size() / 256);
            for (const auto& node : conditioning->nodes) {
                const Vec3& c = node.centroid;
                // Bounding-box prefilter before the strided distance scan.
                const double dx = std::max({bb_lo.x() - c.x(), c.x() - bb_hi.x(), 0.0});
                const double dy = std::max({bb_lo.y() - c.y(), c.y() - bb_hi.y(), 0.0});
                const double dz = std::max({bb_lo.z() - c.z(), c.z() - bb_hi.z(), 0.0});
                if (Vec3(dx, dy, dz).norm() > cfg.context_radius) continue;
                for (size_t i = 0; i < cluster.voxels.size(); i += stride) {
                    if ((cov.voxelCenter(cluster.voxels[i]) - c).norm() <= cfg.context_radius) {
                        cluster.context.push_back(node.label);
                        break;
                    }
                }
            }
        }
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

namespace {

int drawCategorical(const std::vector<double>& weights, double total, double u01) {
    double u = u01 * total;
    for (size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

bool boxAllUnknown(const CoverageMap& cov, const OrientedBox& box) {
    const Vec3 lo = box.center - box.half_extents + Vec3(1e-9, 1e-9, 1e-9);
    const Vec3 hi = box.center + box.half_extents - Vec3(1e-9, 1e-9, 1e-9);
    const auto lo_idx = cov.voxelAt(lo);
    const auto hi_idx = cov.voxelAt(hi);
    if (!lo_idx || !hi_idx) return false; // sticks out of the mapped world
    const auto [x0, y0, z0] = cov.voxelCoords(*lo_idx);
    const auto [x1, y1, z1] = cov.voxelCoords(*hi_idx);
    for (int iz = z0; iz <= z1; ++iz)
        for (int iy = y0; iy <= y1; ++iy)
            for (int ix = x0; ix <= x1; ++ix)
                if (cov.state(cov.linear(ix, iy, iz)) != CoverageMap::State::unknown) return false;
    return true;
}

} // namespace

std::vector<HypotheticalWorld> sampleCompletions(const SceneGraph* conditioning,
                                                 const CoverageMap& cov, const CompletionPrior& prior,
                                                 int sample_count, double floor_z,
                                                 const PlannerConfig& cfg, Rng& rng) {
    prior.validate();
    const auto clusters = findUnknownClusters(cov, floor_z, cfg, conditioning);

    double rate_sum = 0.0;
    for (double r : prior.rates) rate_sum += r;
    const double p_occ = std::min(1.0, rate_sum);

    // Per-cluster label weights: occupancy rates reweighted by mean
    // co-occurrence with the conditioning labels in reach.
    std::vector<std::vector<double>> weights(clusters.size());
    std::vector<double> weight_totals(clusters.size(), 0.0);
    for (size_t ci = 0; ci < clusters.size(); ++ci) {
        auto& w = weights[ci];
        w.assign(prior.vocabulary.size(), 0.0);
        for (size_t l = 0; l < prior.vocabulary.size(); ++l) {
            double factor = 1.0;
            if (!clusters[ci].context.empty()) {
                double sum = 0.0;
                for (const auto& ctx_label : clusters[ci].context) {
                    const int c = prior.indexOf(ctx_label);
                    if (c >= 0) sum += prior.cooc[l][static_cast<size_t>(c)];
                    else sum += 1.0; // labels outside the prior vocabulary are neutral
                }
                factor = sum / static_cast<double>(clusters[ci].context.size());
            }
            w[l] = prior.rates[l] * factor;
        }
        double total = 0.0;
        for (double x : w) total += x;
        if (total <= 0.0) {
            w = prior.rates;
            total = rate_sum;
        }
        weight_totals[ci] = total;
    }

    std::vector<int> base_slots(clusters.size(), 0);
    for (size_t ci = 0; ci < clusters.size(); ++ci)
        base_slots[ci] = std::max(
            1, static_cast<int>(std::llround(clusters[ci].volume / cfg.slot_volume)));

    // Draw discipline: every slot consumes exactly two uniforms from the main
    // stream (occupancy, label) and forks a child stream for placement. Two
    // calls that differ only in the conditioning graph therefore stay aligned
    // draw-for-draw, so paired (unconditioned, conditioned) sample sets share
    // their placement randomness and the gain estimator sees the label
    // sharpening, not placement noise (common-random-numbers pairing).
    std::vector<HypotheticalWorld> samples;
    samples.reserve(static_cast<size_t>(sample_count));
    std::uint64_t slot_counter = 0;
    for (int m = 0; m < sample_count; ++m) {
        HypotheticalWorld hw;
        hw.known = conditioning;
        if (p_occ > 0.0 && rate_sum > 0.0) {
            std::vector<int> remaining = base_slots;
            bool any = !clusters.empty();
            while (any && static_cast<int>(hw.phantoms.size()) < cfg.max_phantoms_per_sample) {
                any = false;
                for (size_t ci = 0; ci < clusters.size() &&
                                    static_cast<int>(hw.phantoms.size()) < cfg.max_phantoms_per_sample;
                     ++ci) {
                    if (remaining[ci] == 0) continue;
                    --remaining[ci];
                    if (remaining[ci] > 0) any = true;
                    const double u_occ = rng.uniform();
                    const double u_label = rng.uniform();
                    Rng place = rng.fork(slot_counter++);
                    if (u_occ >= p_occ) continue;
                    const int l = drawCategorical(weights[ci], weight_totals[ci], u_label);
                    const Vec3 half = prior.sizes[static_cast<size_t>(l)];
                    for (int attempt = 0; attempt < cfg.placement_attempts; ++attempt) {
                        const std::int64_t vox = clusters[ci].voxels[place.uniformInt(
                            static_cast<std::uint32_t>(clusters[ci].voxels.size()))];
                        Vec3 center = cov.voxelCenter(vox);
                        center.z() = std::max(center.z(), floor_z + half.z());
                        const OrientedBox box{center, half, 0.0};
                        if (boxAllUnknown(cov, box)) {
                            hw.phantoms.push_back({prior.vocabulary[static_cast<size_t>(l)], box});
                            break;
                        }
                    }
                }
            }
        }
        samples.push_back(std::move(hw));
    }
    return samples;
}

// ---------------------------------------------------------------------------
// Predicted observations and information gain
// ---------------------------------------------------------------------------

double PredictedObservation::rayEntropyBits(size_t ray) const {
    const auto& outcomes = rays[ray];
    if (outcomes.size() <= 1) return 0.0; // point mass is exactly 0
    double h = 0.0;
    for (const auto& [outcome, count] : outcomes) {
        const double p = static_cast<double>(count) / sample_count;
        h -= p * std::log2(p);
    }
    return h;
}

double PredictedObservation::totalEntropyBits() const {
    double h = 0.0;
    for (size_t r = 0; r < rays.size(); ++r) h += rayEntropyBits(r);
    return h;
}

CompletionRenderer::CompletionRenderer(const std::vector<HypotheticalWorld>& samples,
                                       CoverageMap& cov)
    : cov_(cov), sample_count_(static_cast<int>(samples.size())) {
    overlays_.assign(samples.size(),
                     std::vector<std::uint16_t>(static_cast<size_t>(cov.voxelCount()),
                                                PredictedObservation::kEmptyOutcome));
    for (size_t m = 0; m < samples.size(); ++m) {
        for (const auto& phantom : samples[m].phantoms) {
            const std::uint16_t label = cov.labelId(phantom.label);
            const Vec3 lo = phantom.box.center - phantom.box.half_extents + Vec3(1e-9, 1e-9, 1e-9);
            const Vec3 hi = phantom.box.center + phantom.box.half_extents - Vec3(1e-9, 1e-9, 1e-9);
            const auto lo_idx = cov.voxelAt(lo);
            const auto hi_idx = cov.voxelAt(hi);
            if (!lo_idx || !hi_idx) continue;
            const auto [x0, y0, z0] = cov.voxelCoords(*lo_idx);
            const auto [x1, y1, z1] = cov.voxelCoords(*hi_idx);
            for (int iz = z0; iz <= z1; ++iz)
                for (int iy = y0; iy <= y1; ++iy)
                    for (int ix = x0; ix <= x1; ++ix) {
                        auto& cell = overlays_[m][static_cast<size_t>(cov.linear(ix, iy, iz))];
                        if (cell == PredictedObservation::kEmptyOutcome) cell = label;
                    }
        }
    }
}

PredictedObservation CompletionRenderer::predict(const Pose& pose, const Intrinsics& intr,
                                                 const RayGrid& grid, double max_range) const {
    PredictedObservation obs;
    obs.sample_count = sample_count_;
    obs.rays.resize(static_cast<size_t>(grid.cols) * grid.rows);

    std::vector<std::int64_t> unknown_voxels;
    for (int v = 0; v < grid.rows; ++v) {
        for (int u = 0; u < grid.cols; ++u) {
            const Vec3 dir = pose.rotate(pinholeRayDir(intr, grid, u, v));
            unknown_voxels.clear();
            std::uint16_t occ_label = PredictedObservation::kEmptyOutcome;
            bool hit_occupied = false;
            cov_.traverse(pose.translation, dir, max_range, [&](std::int64_t idx, double) {
                const auto s = cov_.state(idx);
                if (s == CoverageMap::State::occupied) {
                    occ_label = cov_.occupiedLabel(idx);
                    hit_occupied = true;
                    return false;
                }
                if (s == CoverageMap::State::unknown) unknown_voxels.push_back(idx);
                return true;
            });
            (void)hit_occupied;

            std::map<std::uint16_t, int> counts;
            for (int m = 0; m < sample_count_; ++m) {
                std::uint16_t outcome = occ_label;
                for (const std::int64_t idx : unknown_voxels) {
                    const std::uint16_t cell = overlays_[m][static_cast<size_t>(idx)];
                    if (cell != PredictedObservation::kEmptyOutcome) {
                        outcome = cell;
                        break;
                    }
                }
                counts[outcome] += 1;
            }
            auto& ray = obs.rays[static_cast<size_t>(v) * grid.cols + u];
            ray.assign(counts.begin(), counts.end());
        }
    }
    return obs;
}

PredictedObservation predictedDistribution(const Pose& pose, const Intrinsics& intr,
                                           const RayGrid& grid,
                                           const std::vector<HypotheticalWorld>& samples,
                                           CoverageMap& cov, double max_range) {
    return CompletionRenderer(samples, cov).predict(pose, intr, grid, max_range);
}

InfoGainResult infoGain(const Viewpoint& viewpoint, int path_steps, const Pose& pose,
                        const Intrinsics& intr, const RayGrid& grid,
                        const std::vector<HypotheticalWorld>& prior_samples,
                        const std::vector<HypotheticalWorld>& posterior_samples, CoverageMap& cov,
                        double max_range) {
    InfoGainResult result;
    result.viewpoint = viewpoint;
    result.path_steps = path_steps;
    result.h_prior =
        predictedDistribution(pose, intr, grid, prior_samples, cov, max_range).totalEntropyBits();
    result.h_posterior =
        predictedDistribution(pose, intr, grid, posterior_samples, cov, max_range).totalEntropyBits();
    result.gain = result.h_prior - result.h_posterior;
    return result;
}

size_t selectNbv(const std::vector<InfoGainResult>& results) {
    if (results.empty()) throw std::invalid_argument("selectNbv: empty result list");
    size_t best = 0;
    for (size_t i = 1; i < results.size(); ++i) {
        const double gi = std::max(results[i].gain, 0.0);
        const double gb = std::max(results[best].gain, 0.0);
        if (gi > gb) {
            best = i;
        } else if (gi == gb) {
            if (results[i].path_steps < results[best].path_steps ||
                (results[i].path_steps == results[best].path_steps &&
                 results[i].viewpoint.key() < results[best].viewpoint.key()))
                best = i;
        }
    }
    return best;
}

} // namespace asg
