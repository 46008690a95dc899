#pragma once

#include <string>
#include <vector>

#include "vpirl/mdp.hpp"
#include "vpirl/rng.hpp"

namespace vpirl {

enum class Cell : char {
    Wall = '#',
    Free = '.',
    Start = 'S',
    Flag = 'F',
    Goal = 'G',
    Trap = 'T',
};

/// Thrown on malformed map text; carries 1-based line/column context.
struct MapParseError : std::runtime_error {
    MapParseError(const std::string& message, int line, int column);
    int line;
    int column;
};

/**
A rectangular maze of walls, free cells, one start, at least one goal, and
any number of flags and traps. Cells are indexed row-major.
*/
struct MazeMap {
    int rows = 0;
    int cols = 0;
    std::vector<Cell> cells;  // row-major
    int start_cell = -1;
    std::vector<int> goal_cells;
    std::vector<int> flag_cells;  // flag bit i corresponds to flag_cells[i]
    std::vector<int> trap_cells;

    Cell at(int r, int c) const { return cells[r * cols + c]; }
    int cell_index(int r, int c) const { return r * cols + c; }
    bool is_wall(int r, int c) const;  // out-of-bounds counts as wall
    int num_flags() const { return static_cast<int>(flag_cells.size()); }
};

/// Parses the text grid format. Rows are newline-separated; shorter rows are
/// padded with walls. Unknown characters, zero or multiple starts, or a
/// missing goal raise MapParseError.
MazeMap parse_map(const std::string& text);
MazeMap load_map_file(const std::string& path);

/// Movement and reward constants of the stochastic maze dynamics.
struct EnvConfig {
    double success_prob = 0.9;  // intended direction; the rest slips perpendicular
    double trap_reward = -10.0;
    double flag_reward = 1.0;
    double discount = 0.95;
};

/// Agent position plus the set of flags currently held.
struct EnvState {
    int pos = 0;
    unsigned flags = 0;
    bool operator==(const EnvState& other) const = default;
};

inline constexpr int kNumDirections = 4;  // up, down, left, right

/**
The maze compiled to a flat MDP over reachable (position, flags) states.
Entering a flag cell adds its flag; entering a goal cell while then holding
every flag pays flag_reward per flag and teleports to the start with no
flags; entering a trap cell pays trap_reward. Blocked moves leave the
position unchanged. Rewards are attributed to the destination, so the
compiled (s, a) outcome distribution couples successor and reward; the Mdp
view exposes the two marginals.
*/
class CompiledEnv {
public:
    struct Outcome {
        double prob;
        int t;            // successor state id
        int reward_index;  // into reward support
    };

    CompiledEnv(MazeMap map, EnvConfig cfg);

    const MazeMap& map() const { return map_; }
    const EnvConfig& config() const { return cfg_; }
    const Mdp& mdp() const { return mdp_; }
    int num_states() const { return static_cast<int>(states_.size()); }
    int start_state() const { return start_state_; }
    const std::vector<EnvState>& states() const { return states_; }
    EnvState state(int id) const { return states_[id]; }
    /// -1 when the (position, flags) pair is unreachable.
    int state_id(const EnvState& s) const;
    const std::vector<Outcome>& outcomes(int s, int a) const;

    /// Samples one environment transition; reward and successor are drawn
    /// jointly from the compiled outcome distribution.
    std::pair<int, double> step(int s, int a, RngEngine& rng) const;

private:
    MazeMap map_;
    EnvConfig cfg_;
    Mdp mdp_;
    std::vector<EnvState> states_;
    std::vector<int> state_lookup_;  // (pos, flags) -> id or -1
    int start_state_ = 0;
    std::vector<std::vector<Outcome>> outcomes_;
};

/// Compiles the maze and returns just the flat MDP.
Mdp compile_to_mdp(const MazeMap& map, const EnvConfig& cfg);

} // namespace vpirl
