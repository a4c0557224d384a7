#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffpath/evaluation.hpp"
#include "diffpath/inference.hpp"
#include "diffpath/synth.hpp"
#include "diffpath/types.hpp"

namespace diffpath {

// shortest decimal that round-trips the value
std::string format_double(double v);
// 9 significant digits, used for serialized rates
std::string format_rate(double v);

double parse_double(const std::string& s, int line_no);
long parse_long(const std::string& s, int line_no);

// --- ground-truth file: header "N,<node_count>" then one edge per line
//     "src,dst,kind,peak,onset,period,duration"

void write_ground_truth(const std::filesystem::path& path, const ground_truth_network& net);
ground_truth_network read_ground_truth(const std::filesystem::path& path);

// --- cascade file: optional "window,<w>" pragma, node section
//     "node_id,name[,label]", one blank line, then one cascade per line
//     "cascade_id;start_time;n1,t1,n2,t2,...". A node repeated within a
//     record keeps its first occurrence (with a warning on stderr).

struct cascade_file {
    std::vector<node_info> nodes;  // sorted by id
    std::vector<cascade> cascades;
    int dropped_duplicates = 0;
};

cascade_file parse_cascade_file(const std::filesystem::path& path,
                                std::optional<double> window_override = std::nullopt);

// Requires a uniform window across cascades, which becomes the file's
// window pragma.
void write_cascade_file(const std::filesystem::path& path, const std::vector<node_info>& nodes,
                        const std::vector<cascade>& cascades);

// node section only, for label files; tolerates a full cascade file
std::vector<node_info> read_node_table(const std::filesystem::path& path);

label_map labels_of(const std::vector<node_info>& nodes);

// --- snapshot series: one "net_<t>.txt" per step with header "t,<t>" and
//     sorted "src,dst,rate" lines; "index.csv" (step,t,n_edges); "edges.csv"
//     (src,dst,t,rate) carrying each edge's trajectory.

void write_snapshot_series(const std::filesystem::path& dir,
                           const std::vector<rate_snapshot>& snapshots);
std::vector<rate_snapshot> read_snapshot_series(const std::filesystem::path& dir);

void write_scores_csv(const std::filesystem::path& path,
                      const std::vector<snapshot_score>& scores);

struct centrality_row {
    double t = 0.0;
    node_id node = 0;
    node_label label = node_label::unknown;
    double centrality = 0.0;
};

void write_centrality_csv(const std::filesystem::path& path,
                          const std::vector<centrality_row>& rows);

struct edge_type_row {
    double t = 0.0;
    edge_type_counts_t counts;
};

void write_edge_types_csv(const std::filesystem::path& path,
                          const std::vector<edge_type_row>& rows);

// --- run manifest, written next to every command's outputs

struct run_manifest {
    std::string command;
    std::map<std::string, std::string> options;
    std::vector<std::string> inputs;
    std::string output;
    std::uint64_t rng_seed = 0;
};

void write_manifest(const std::filesystem::path& path, const run_manifest& manifest);

}  // namespace diffpath
