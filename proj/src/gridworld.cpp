#include "vpirl/gridworld.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vpirl {

MapParseError::MapParseError(const std::string& message, int line, int column)
    : std::runtime_error(message + " (line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ")"),
      line(line), column(column) {}

bool MazeMap::is_wall(int r, int c) const {
    if (r < 0 || r >= rows || c < 0 || c >= cols) return true;
    return at(r, c) == Cell::Wall;
}

MazeMap parse_map(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream iss(text);
    while (std::getline(iss, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw MapParseError("empty map", 1, 1);

    MazeMap map;
    map.rows = static_cast<int>(lines.size());
    map.cols = 0;
    for (const std::string& l : lines)
        map.cols = std::max(map.cols, static_cast<int>(l.size()));
    map.cells.assign(static_cast<std::size_t>(map.rows) * map.cols, Cell::Wall);

    for (int r = 0; r < map.rows; ++r) {
        for (int c = 0; c < static_cast<int>(lines[r].size()); ++c) {
            char ch = lines[r][c];
            int idx = map.cell_index(r, c);
            switch (ch) {
                case '#': map.cells[idx] = Cell::Wall; break;
                case '.': map.cells[idx] = Cell::Free; break;
                case 'S':
                    if (map.start_cell >= 0)
                        throw MapParseError("multiple start cells", r + 1, c + 1);
                    map.cells[idx] = Cell::Start;
                    map.start_cell = idx;
                    break;
                case 'F':
                    map.cells[idx] = Cell::Flag;
                    map.flag_cells.push_back(idx);
                    break;
                case 'G':
                    map.cells[idx] = Cell::Goal;
                    map.goal_cells.push_back(idx);
                    break;
                case 'T':
                    map.cells[idx] = Cell::Trap;
                    map.trap_cells.push_back(idx);
                    break;
                default:
                    throw MapParseError(std::string("unknown map character '") + ch + "'",
                                        r + 1, c + 1);
            }
        }
    }
    if (map.start_cell < 0) throw MapParseError("no start cell", 1, 1);
    if (map.goal_cells.empty()) throw MapParseError("no goal cell", 1, 1);
    if (map.num_flags() > 16) throw MapParseError("too many flags (max 16)", 1, 1);
    return map;
}

MazeMap load_map_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_map_file: cannot open " + path);
    std::ostringstream oss;
    oss << is.rdbuf();
    return parse_map(oss.str());
}

namespace {

// up, down, left, right
constexpr int kRowDelta[kNumDirections] = {-1, 1, 0, 0};
constexpr int kColDelta[kNumDirections] = {0, 0, -1, 1};
// perpendicular directions for each action
constexpr int kPerp[kNumDirections][2] = {{2, 3}, {2, 3}, {0, 1}, {0, 1}};

struct RawOutcome {
    EnvState state;
    double reward;
};

int move_cell(const MazeMap& map, int pos, int dir) {
    int r = pos / map.cols, c = pos % map.cols;
    int nr = r + kRowDelta[dir], nc = c + kColDelta[dir];
    if (map.is_wall(nr, nc)) return pos;
    return map.cell_index(nr, nc);
}

unsigned flag_bit(const MazeMap& map, int cell) {
    for (std::size_t i = 0; i < map.flag_cells.size(); ++i)
        if (map.flag_cells[i] == cell) return 1u << i;
    return 0u;
}

bool is_goal(const MazeMap& map, int cell) {
    return std::find(map.goal_cells.begin(), map.goal_cells.end(), cell) !=
           map.goal_cells.end();
}

bool is_trap(const MazeMap& map, int cell) {
    return std::find(map.trap_cells.begin(), map.trap_cells.end(), cell) !=
           map.trap_cells.end();
}

/// Resolves landing on cell `dest` while holding `flags`: flag pickup, then
/// goal delivery (teleport to start), then trap penalty.
RawOutcome resolve(const MazeMap& map, const EnvConfig& cfg, int dest, unsigned flags) {
    unsigned all_mask = (map.num_flags() > 0) ? ((1u << map.num_flags()) - 1u) : 0u;
    unsigned next_flags = flags | flag_bit(map, dest);
    if (is_goal(map, dest) && next_flags == all_mask)
        return {{map.start_cell, 0u}, cfg.flag_reward * map.num_flags()};
    if (is_trap(map, dest)) return {{dest, next_flags}, cfg.trap_reward};
    return {{dest, next_flags}, 0.0};
}

} // namespace

CompiledEnv::CompiledEnv(MazeMap map, EnvConfig cfg)
    : map_(std::move(map)), cfg_(std::move(cfg)) {
    if (!(cfg_.success_prob > 0.0 && cfg_.success_prob <= 1.0))
        throw std::invalid_argument("CompiledEnv: success_prob must lie in (0, 1]");
    const double slip = (1.0 - cfg_.success_prob) / 2.0;
    const unsigned num_flag_sets = 1u << map_.num_flags();

    // Reward support: sorted unique set of every reward the dynamics can emit.
    std::vector<double> support = {0.0};
    if (!map_.trap_cells.empty()) support.push_back(cfg_.trap_reward);
    if (map_.num_flags() > 0) support.push_back(cfg_.flag_reward * map_.num_flags());
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    auto reward_idx = [&](double r) {
        for (std::size_t i = 0; i < support.size(); ++i)
            if (support[i] == r) return static_cast<int>(i);
        throw std::logic_error("CompiledEnv: reward outside computed support");
    };

    // Breadth-first enumeration of reachable (position, flags) states.
    state_lookup_.assign(static_cast<std::size_t>(map_.rows) * map_.cols * num_flag_sets, -1);
    auto lookup_index = [&](const EnvState& s) {
        return static_cast<std::size_t>(s.pos) * num_flag_sets + s.flags;
    };
    auto intern = [&](const EnvState& s) {
        int& id = state_lookup_[lookup_index(s)];
        if (id < 0) {
            id = static_cast<int>(states_.size());
            states_.push_back(s);
        }
        return id;
    };

    EnvState start{map_.start_cell, 0u};
    start_state_ = intern(start);
    std::deque<int> frontier = {start_state_};

    while (!frontier.empty()) {
        int sid = frontier.front();
        frontier.pop_front();
        EnvState s = states_[sid];
        for (int a = 0; a < kNumDirections; ++a) {
            int dests[3] = {move_cell(map_, s.pos, a), move_cell(map_, s.pos, kPerp[a][0]),
                            move_cell(map_, s.pos, kPerp[a][1])};
            double probs[3] = {cfg_.success_prob, slip, slip};
            for (int i = 0; i < 3; ++i) {
                if (probs[i] <= 0.0) continue;
                RawOutcome out = resolve(map_, cfg_, dests[i], s.flags);
                int tid = state_lookup_[lookup_index(out.state)];
                if (tid < 0) {
                    tid = intern(out.state);
                    frontier.push_back(tid);
                }
            }
        }
    }

    // Second pass: fill transition rows and joint outcomes with final ids.
    const int S = num_states();
    mdp_ = Mdp(S, kNumDirections, support, cfg_.discount);
    outcomes_.assign(static_cast<std::size_t>(S) * kNumDirections, {});
    for (int sid = 0; sid < S; ++sid) {
        EnvState s = states_[sid];
        for (int a = 0; a < kNumDirections; ++a) {
            std::map<std::pair<int, int>, double> merged;  // (t id, reward idx) -> prob
            auto add = [&](int dest_cell, double prob) {
                if (prob <= 0.0) return;
                RawOutcome out = resolve(map_, cfg_, dest_cell, s.flags);
                int tid = state_lookup_[lookup_index(out.state)];
                merged[{tid, reward_idx(out.reward)}] += prob;
            };
            add(move_cell(map_, s.pos, a), cfg_.success_prob);
            add(move_cell(map_, s.pos, kPerp[a][0]), slip);
            add(move_cell(map_, s.pos, kPerp[a][1]), slip);

            auto& outs = outcomes_[static_cast<std::size_t>(sid) * kNumDirections + a];
            for (const auto& [key, prob] : merged) {
                outs.push_back({prob, key.first, key.second});
                mdp_.transition_row(sid, a)[key.first] += prob;
                mdp_.reward_row(sid, a)[key.second] += prob;
            }
        }
    }
    mdp_.validate(1e-12);
}

int CompiledEnv::state_id(const EnvState& s) const {
    unsigned num_flag_sets = 1u << map_.num_flags();
    if (s.pos < 0 || s.pos >= map_.rows * map_.cols || s.flags >= num_flag_sets) return -1;
    return state_lookup_[static_cast<std::size_t>(s.pos) * num_flag_sets + s.flags];
}

const std::vector<CompiledEnv::Outcome>& CompiledEnv::outcomes(int s, int a) const {
    return outcomes_[static_cast<std::size_t>(mdp_.row(s, a))];
}

std::pair<int, double> CompiledEnv::step(int s, int a, RngEngine& rng) const {
    const auto& outs = outcomes(s, a);
    double u = uniform01(rng);
    double acc = 0.0;
    for (const Outcome& out : outs) {
        acc += out.prob;
        if (u < acc) return {out.t, mdp_.reward_support()[out.reward_index]};
    }
    const Outcome& last = outs.back();
    return {last.t, mdp_.reward_support()[last.reward_index]};
}

Mdp compile_to_mdp(const MazeMap& map, const EnvConfig& cfg) {
    return CompiledEnv(map, cfg).mdp();
}

} // namespace vpirl
