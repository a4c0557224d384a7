#include "diffpath/io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "diffpath/version.hpp"

namespace diffpath {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return in;
}

const char* label_name(node_label l) {
    switch (l) {
        case node_label::media: return "media";
        case node_label::blog: return "blog";
        case node_label::unknown: return "unknown";
    }
    return "unknown";
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_rate(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, int line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw parse_error("malformed number '" + s + "'", line_no);
    return v;
}

long parse_long(const std::string& s, int line_no) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw parse_error("malformed integer '" + s + "'", line_no);
    return v;
}

void write_ground_truth(const std::filesystem::path& path, const ground_truth_network& net) {
    auto out = open_out(path);
    out << "N," << net.node_count() << "\n";
    for (const auto& e : net.edges()) {
        const auto& p = e.pattern;
        out << e.src << ',' << e.dst << ',' << pattern_kind_name(p.kind) << ','
            << format_double(p.peak) << ',' << format_double(p.onset) << ','
            << format_double(p.period) << ',' << format_double(p.duration) << "\n";
    }
}

ground_truth_network read_ground_truth(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    int line_no = 0;

    if (!std::getline(in, line)) throw parse_error("empty ground-truth file", 1);
    ++line_no;
    line = strip_cr(line);
    auto header = split(line, ',');
    if (header.size() != 2 || header[0] != "N")
        throw parse_error("expected header 'N,<node_count>'", line_no);
    const long node_count = parse_long(header[1], line_no);
    if (node_count < 1) throw parse_error("node count must be positive", line_no);

    std::vector<ground_truth_edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != 7)
            throw parse_error("expected 'src,dst,kind,peak,onset,period,duration'", line_no);
        ground_truth_edge e;
        e.src = static_cast<node_id>(parse_long(fields[0], line_no));
        e.dst = static_cast<node_id>(parse_long(fields[1], line_no));
        try {
            e.pattern.kind = pattern_kind_from_name(fields[2]);
        } catch (const std::invalid_argument& ex) {
            throw parse_error(ex.what(), line_no);
        }
        e.pattern.peak = parse_double(fields[3], line_no);
        e.pattern.onset = parse_double(fields[4], line_no);
        e.pattern.period = parse_double(fields[5], line_no);
        e.pattern.duration = parse_double(fields[6], line_no);
        edges.push_back(e);
    }
    try {
        return ground_truth_network(static_cast<int>(node_count), std::move(edges));
    } catch (const std::invalid_argument& ex) {
        throw parse_error(ex.what(), line_no);
    }
}

cascade_file parse_cascade_file(const std::filesystem::path& path,
                                std::optional<double> window_override) {
    auto in = open_in(path);
    cascade_file result;
    std::unordered_set<node_id> declared;
    std::optional<double> pragma_window;

    std::string line;
    int line_no = 0;
    bool in_nodes = true;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (in_nodes) {
            if (line.empty()) {
                in_nodes = false;
                continue;
            }
            auto fields = split(line, ',');
            if (line_no == 1 && fields.size() == 2 && fields[0] == "window") {
                pragma_window = parse_double(fields[1], line_no);
                if (!(*pragma_window > 0.0))
                    throw parse_error("window must be positive", line_no);
                continue;
            }
            if (fields.size() != 2 && fields.size() != 3)
                throw parse_error("expected 'node_id,name[,label]'", line_no);
            node_info info;
            info.id = static_cast<node_id>(parse_long(fields[0], line_no));
            if (info.id < 0) throw parse_error("node ids must be non-negative", line_no);
            info.name = fields[1];
            if (fields.size() == 3) {
                if (fields[2] == "media")
                    info.label = node_label::media;
                else if (fields[2] == "blog")
                    info.label = node_label::blog;
                else
                    throw parse_error("unknown label '" + fields[2] + "'", line_no);
            }
            if (!declared.insert(info.id).second)
                throw parse_error("node " + std::to_string(info.id) + " declared twice", line_no);
            result.nodes.push_back(std::move(info));
            continue;
        }

        if (line.empty()) continue;
        auto fields = split(line, ';');
        if (fields.size() != 3)
            throw parse_error("expected 'cascade_id;start_time;events'", line_no);
        const std::string& id = fields[0];
        const double start = parse_double(fields[1], line_no);
        auto tokens = split(fields[2], ',');
        if (tokens.size() < 2 || tokens.size() % 2 != 0)
            throw parse_error("event list must be 'n1,t1,n2,t2,...'", line_no);

        std::vector<cascade_event> events;
        std::unordered_set<node_id> seen;
        double prev_time = start;
        for (std::size_t i = 0; i < tokens.size(); i += 2) {
            cascade_event ev;
            ev.node = static_cast<node_id>(parse_long(tokens[i], line_no));
            ev.time = parse_double(tokens[i + 1], line_no);
            if (!declared.count(ev.node))
                throw parse_error("undeclared node " + std::to_string(ev.node), line_no);
            if (ev.time < prev_time)
                throw parse_error("event times must be non-decreasing", line_no);
            prev_time = ev.time;
            if (!seen.insert(ev.node).second) {
                std::cerr << path.string() << ":" << line_no << ": node " << ev.node
                          << " repeated in cascade '" << id << "', keeping first occurrence\n";
                ++result.dropped_duplicates;
                continue;
            }
            events.push_back(ev);
        }
        if (events.front().time != start)
            throw parse_error("start_time differs from first event time", line_no);

        double window;
        if (window_override)
            window = *window_override;
        else if (pragma_window)
            window = *pragma_window;
        else  // unrecorded window: fall back to the observed span
            window = std::max(events.back().time - events.front().time, 1.0);

        try {
            result.cascades.emplace_back(id, std::move(events), window);
        } catch (const std::invalid_argument& ex) {
            throw parse_error(ex.what(), line_no);
        }
    }

    std::sort(result.nodes.begin(), result.nodes.end(),
              [](const node_info& a, const node_info& b) { return a.id < b.id; });
    return result;
}

void write_cascade_file(const std::filesystem::path& path, const std::vector<node_info>& nodes,
                        const std::vector<cascade>& cascades) {
    for (const auto& c : cascades)
        if (c.window() != cascades.front().window())
            throw std::invalid_argument(
                "write_cascade_file: cascades must share one window length");

    auto out = open_out(path);
    if (!cascades.empty()) out << "window," << format_double(cascades.front().window()) << "\n";
    for (const auto& n : nodes) {
        out << n.id << ',' << n.name;
        if (n.label != node_label::unknown) out << ',' << label_name(n.label);
        out << "\n";
    }
    out << "\n";
    for (const auto& c : cascades) {
        out << c.id() << ';' << format_double(c.start_time()) << ';';
        bool first = true;
        for (const auto& ev : c.events()) {
            if (!first) out << ',';
            out << ev.node << ',' << format_double(ev.time);
            first = false;
        }
        out << "\n";
    }
}

std::vector<node_info> read_node_table(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<node_info> nodes;
    std::unordered_set<node_id> declared;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) break;  // cascade section follows, if any
        auto fields = split(line, ',');
        if (line_no == 1 && fields.size() == 2 && fields[0] == "window") continue;
        if (fields.size() != 2 && fields.size() != 3)
            throw parse_error("expected 'node_id,name[,label]'", line_no);
        node_info info;
        info.id = static_cast<node_id>(parse_long(fields[0], line_no));
        info.name = fields[1];
        if (fields.size() == 3) {
            if (fields[2] == "media")
                info.label = node_label::media;
            else if (fields[2] == "blog")
                info.label = node_label::blog;
            else
                throw parse_error("unknown label '" + fields[2] + "'", line_no);
        }
        if (!declared.insert(info.id).second)
            throw parse_error("node " + std::to_string(info.id) + " declared twice", line_no);
        nodes.push_back(std::move(info));
    }
    std::sort(nodes.begin(), nodes.end(),
              [](const node_info& a, const node_info& b) { return a.id < b.id; });
    return nodes;
}

label_map labels_of(const std::vector<node_info>& nodes) {
    label_map out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out[n.id] = n.label;
    return out;
}

namespace {

std::vector<std::pair<std::uint64_t, double>> sorted_rates(const rate_snapshot& snap) {
    std::vector<std::pair<std::uint64_t, double>> rates(snap.rates().begin(),
                                                        snap.rates().end());
    std::sort(rates.begin(), rates.end());
    return rates;
}

}  // namespace

void write_snapshot_series(const std::filesystem::path& dir,
                           const std::vector<rate_snapshot>& snapshots) {
    std::filesystem::create_directories(dir);

    auto index = open_out(dir / "index.csv");
    index << "step,t,n_edges\n";
    std::map<std::uint64_t, std::vector<std::pair<double, double>>> trajectories;

    for (const auto& snap : snapshots) {
        const std::string t_str = format_double(snap.time());
        auto net = open_out(dir / ("net_" + t_str + ".txt"));
        net << "t," << t_str << "\n";
        for (const auto& [key, rate] : sorted_rates(snap)) {
            const auto [s, d] = edge_nodes(key);
            net << s << ',' << d << ',' << format_rate(rate) << "\n";
            trajectories[key].emplace_back(snap.time(), rate);
        }
        index << snap.step() << ',' << t_str << ',' << snap.size() << "\n";
    }

    auto edges = open_out(dir / "edges.csv");
    edges << "src,dst,t,rate\n";
    for (const auto& [key, series] : trajectories) {
        const auto [s, d] = edge_nodes(key);
        for (const auto& [t, rate] : series)
            edges << s << ',' << d << ',' << format_double(t) << ',' << format_rate(rate)
                  << "\n";
    }
}

std::vector<rate_snapshot> read_snapshot_series(const std::filesystem::path& dir) {
    auto index = open_in(dir / "index.csv");
    std::string line;
    int line_no = 0;
    if (!std::getline(index, line)) throw parse_error("empty snapshot index", 1);
    ++line_no;

    std::vector<rate_snapshot> out;
    while (std::getline(index, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != 3) throw parse_error("expected 'step,t,n_edges'", line_no);
        const int step = static_cast<int>(parse_long(fields[0], line_no));

        const auto net_path = dir / ("net_" + fields[1] + ".txt");
        auto net = open_in(net_path);
        std::string net_line;
        int net_line_no = 0;
        if (!std::getline(net, net_line))
            throw parse_error("empty snapshot file " + net_path.string(), 1);
        ++net_line_no;
        rate_snapshot snap(step, parse_double(fields[1], line_no));
        while (std::getline(net, net_line)) {
            ++net_line_no;
            net_line = strip_cr(net_line);
            if (net_line.empty()) continue;
            auto cols = split(net_line, ',');
            if (cols.size() != 3) throw parse_error("expected 'src,dst,rate'", net_line_no);
            snap.set(static_cast<node_id>(parse_long(cols[0], net_line_no)),
                     static_cast<node_id>(parse_long(cols[1], net_line_no)),
                     parse_double(cols[2], net_line_no));
        }
        out.push_back(std::move(snap));
    }
    return out;
}

void write_scores_csv(const std::filesystem::path& path,
                      const std::vector<snapshot_score>& scores) {
    auto out = open_out(path);
    out << "t,precision,recall,accuracy,mse\n";
    for (const auto& s : scores)
        out << format_double(s.t) << ',' << format_rate(s.precision) << ','
            << format_rate(s.recall) << ',' << format_rate(s.accuracy) << ','
            << format_rate(s.mse) << "\n";
}

void write_centrality_csv(const std::filesystem::path& path,
                          const std::vector<centrality_row>& rows) {
    auto out = open_out(path);
    out << "t,node,label,centrality\n";
    for (const auto& r : rows)
        out << format_double(r.t) << ',' << r.node << ',' << label_name(r.label) << ','
            << format_rate(r.centrality) << "\n";
}

void write_edge_types_csv(const std::filesystem::path& path,
                          const std::vector<edge_type_row>& rows) {
    auto out = open_out(path);
    out << "t,mm,mb,bm,bb,unknown\n";
    for (const auto& r : rows)
        out << format_double(r.t) << ',' << r.counts.media_media << ',' << r.counts.media_blog
            << ',' << r.counts.blog_media << ',' << r.counts.blog_blog << ','
            << r.counts.with_unknown << "\n";
}

void write_manifest(const std::filesystem::path& path, const run_manifest& manifest) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["options"] = manifest.options;
    j["inputs"] = manifest.inputs;
    j["output"] = manifest.output;
    j["rng_seed"] = manifest.rng_seed;
    j["tool_version"] = tool_version;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

}  // namespace diffpath
