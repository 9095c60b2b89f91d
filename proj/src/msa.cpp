#include "mirkit/msa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <future>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace mirkit {

DistanceMatrix distance_matrix(std::span<const SeqRecord> seqs, const ScoringScheme& scheme,
                               unsigned threads) {
    if (seqs.size() < 2)
        throw make_error(Errc::invalid_argument, "distance matrix requires at least 2 sequences");

    DistanceMatrix dm;
    dm.ids.reserve(seqs.size());
    for (const auto& rec : seqs) dm.ids.push_back(rec.id);
    dm.d.assign(seqs.size(), std::vector<double>(seqs.size(), 0.0));

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < seqs.size(); ++i)
        for (std::size_t j = i + 1; j < seqs.size(); ++j) cells.emplace_back(i, j);

    auto compute = [&](std::size_t from, std::size_t to) {
        for (std::size_t c = from; c < to; ++c) {
            auto [i, j] = cells[c];
            auto al = global_align(seqs[i].residues.view(), seqs[j].residues.view(), scheme);
            double dist = 1.0 - fractional_identity(al);
            dm.d[i][j] = dist;
            dm.d[j][i] = dist;
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1 || cells.size() < 2) {
        compute(0, cells.size());
    } else {
        std::vector<std::future<void>> futures;
        std::size_t chunk = (cells.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::size_t from = t * chunk;
            std::size_t to = std::min(cells.size(), from + chunk);
            if (from >= to) break;
            futures.push_back(std::async(std::launch::async, compute, from, to));
        }
        for (auto& f : futures) f.get();
    }
    return dm;
}

std::vector<std::string> GuideTree::leaf_labels(int idx) const {
    // Left-to-right: push right first so the left child pops first.
    std::vector<std::string> out;
    std::vector<int> stack{idx};
    while (!stack.empty()) {
        int n = stack.back();
        stack.pop_back();
        if (is_leaf(n)) {
            out.push_back(nodes[n].label);
        } else {
            stack.push_back(nodes[n].right);
            stack.push_back(nodes[n].left);
        }
    }
    return out;
}

namespace {

void newick_node(const GuideTree& tree, int idx, std::string& out) {
    const auto& node = tree.nodes[idx];
    if (tree.is_leaf(idx)) {
        out += node.label;
        return;
    }
    char buf[48];
    out += '(';
    newick_node(tree, node.left, out);
    std::snprintf(buf, sizeof buf, ":%.6f", node.left_length);
    out += buf;
    out += ',';
    newick_node(tree, node.right, out);
    std::snprintf(buf, sizeof buf, ":%.6f", node.right_length);
    out += buf;
    out += ')';
}

}  // namespace

std::string GuideTree::to_newick() const {
    std::string out;
    if (root >= 0) newick_node(*this, root, out);
    out += ";";
    return out;
}

GuideTree build_guide_tree(const DistanceMatrix& dm) {
    const std::size_t n = dm.size();
    if (n < 2) throw make_error(Errc::invalid_argument, "guide tree requires at least 2 ids");

    GuideTree tree;
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tree.nodes[i].label = dm.ids[i];
        tree.nodes[i].leaf_count = 1;
    }

    // Distances keyed by node index; grows as internal nodes are created.
    std::map<std::pair<int, int>, double> dist;
    auto key = [](int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); };
    std::vector<int> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dist[key(static_cast<int>(i), static_cast<int>(j))] = dm.d[i][j];

    auto join = [&](int a, int b, double la, double lb) {
        GuideTree::Node node;
        node.left = a;
        node.right = b;
        node.left_length = std::max(0.0, la);
        node.right_length = std::max(0.0, lb);
        node.leaf_count = tree.nodes[a].leaf_count + tree.nodes[b].leaf_count;
        tree.nodes.push_back(node);
        return static_cast<int>(tree.nodes.size() - 1);
    };

    while (active.size() > 2) {
        const std::size_t r = active.size();
        std::map<int, double> rowsum;
        for (int i : active) {
            double s = 0.0;
            for (int k : active)
                if (k != i) s += dist[key(i, k)];
            rowsum[i] = s;
        }
        // Q-criterion minimum; iteration order makes the smallest index pair
        // win exact ties.
        double best_q = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (std::size_t x = 0; x < active.size(); ++x) {
            for (std::size_t y = x + 1; y < active.size(); ++y) {
                int i = active[x], j = active[y];
                double q = (static_cast<double>(r) - 2.0) * dist[key(i, j)] - rowsum[i] - rowsum[j];
                if (q < best_q) {
                    best_q = q;
                    bi = i;
                    bj = j;
                }
            }
        }
        double dij = dist[key(bi, bj)];
        double li = 0.5 * dij + (rowsum[bi] - rowsum[bj]) / (2.0 * (static_cast<double>(r) - 2.0));
        double lj = dij - li;
        int merged = join(bi, bj, li, lj);
        for (int k : active) {
            if (k == bi || k == bj) continue;
            dist[key(merged, k)] = 0.5 * (dist[key(bi, k)] + dist[key(bj, k)] - dij);
        }
        std::erase(active, bi);
        std::erase(active, bj);
        active.push_back(merged);
    }

    int a = active[0], b = active[1];
    double d = dist.count(key(a, b)) ? dist[key(a, b)] : 0.0;
    bool a_leaf = tree.is_leaf(a), b_leaf = tree.is_leaf(b);
    double la, lb;
    if (a_leaf == b_leaf) {
        la = lb = 0.5 * d;  // two leaves (n == 2) or two internal subtrees
    } else if (a_leaf) {
        la = d;
        lb = 0.0;
    } else {
        la = 0.0;
        lb = d;
    }
    tree.root = join(a, b, la, lb);
    return tree;
}

std::string Msa::degapped(std::size_t row) const {
    std::string out;
    out.reserve(rows[row].size());
    for (char c : rows[row])
        if (c != '-') out.push_back(c);
    return out;
}

int Msa::row_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return static_cast<int>(i);
    return -1;
}

std::size_t Msa::column_of(std::size_t row, std::size_t pos) const {
    std::size_t count = 0;
    const std::string& r = rows[row];
    for (std::size_t c = 0; c < r.size(); ++c) {
        if (r[c] != '-' && ++count == pos) return c + 1;
    }
    throw make_error(Errc::invalid_argument,
                     "residue position " + std::to_string(pos) + " beyond row length");
}

Msa progressive_msa(std::span<const SeqRecord> seqs, const GuideTree& tree,
                    const ScoringScheme& scheme) {
    if (tree.leaf_count() != seqs.size())
        throw make_error(Errc::invalid_argument, "guide tree does not match the sequence set");

    std::map<std::string, std::string_view, std::less<>> by_id;
    for (const auto& rec : seqs) by_id.emplace(rec.id, rec.residues.view());

    // Post-order merge; gaps introduced at a node persist upward.
    std::vector<Profile> profiles(tree.nodes.size());
    std::vector<int> order;
    {
        std::vector<std::pair<int, bool>> stack{{tree.root, false}};
        while (!stack.empty()) {
            auto [idx, visited] = stack.back();
            stack.pop_back();
            if (tree.is_leaf(idx)) {
                order.push_back(idx);
            } else if (visited) {
                order.push_back(idx);
            } else {
                stack.push_back({idx, true});
                stack.push_back({tree.nodes[idx].right, false});
                stack.push_back({tree.nodes[idx].left, false});
            }
        }
    }
    for (int idx : order) {
        if (tree.is_leaf(idx)) {
            auto it = by_id.find(tree.nodes[idx].label);
            if (it == by_id.end())
                throw make_error(Errc::invalid_argument,
                                 "guide tree leaf '" + tree.nodes[idx].label +
                                     "' missing from the sequence set");
            profiles[idx] = Profile(tree.nodes[idx].label, it->second);
        } else {
            profiles[idx] =
                profile_align(profiles[tree.nodes[idx].left], profiles[tree.nodes[idx].right], scheme)
                    .merged;
            profiles[tree.nodes[idx].left] = Profile();
            profiles[tree.nodes[idx].right] = Profile();
        }
    }

    const Profile& final_profile = profiles[tree.root];
    std::map<std::string, std::size_t, std::less<>> row_index;
    for (std::size_t i = 0; i < final_profile.member_ids().size(); ++i)
        row_index.emplace(final_profile.member_ids()[i], i);

    Msa msa;
    for (const auto& rec : seqs) {
        msa.ids.push_back(rec.id);
        msa.rows.push_back(final_profile.rows()[row_index.at(rec.id)]);
    }
    return msa;
}

std::vector<Cluster> extract_clusters(const GuideTree& tree, std::size_t min_size,
                                      std::size_t max_size) {
    if (min_size < 1 || min_size > max_size)
        throw make_error(Errc::invalid_argument, "cluster sizes must satisfy 1 <= min <= max");

    // Deepest-first cut, emitted left to right.
    std::vector<Cluster> clusters;
    std::vector<int> stack{tree.root};
    while (!stack.empty()) {
        int idx = stack.back();
        stack.pop_back();
        if (tree.nodes[idx].leaf_count <= max_size) {
            clusters.push_back(Cluster{tree.leaf_labels(idx), false});
        } else {
            stack.push_back(tree.nodes[idx].right);
            stack.push_back(tree.nodes[idx].left);
        }
    }

    // Merge undersized clusters with their neighbour while the result stays
    // within max_size; a trailing undersized cluster merges backwards.
    std::vector<Cluster> merged;
    for (auto& c : clusters) {
        if (!merged.empty() && merged.back().size() < min_size &&
            merged.back().size() + c.size() <= max_size) {
            merged.back().ids.insert(merged.back().ids.end(), c.ids.begin(), c.ids.end());
        } else {
            merged.push_back(std::move(c));
        }
    }
    if (merged.size() >= 2) {
        auto& last = merged.back();
        auto& prev = merged[merged.size() - 2];
        if (last.size() < min_size && last.size() + prev.size() <= max_size) {
            prev.ids.insert(prev.ids.end(), last.ids.begin(), last.ids.end());
            merged.pop_back();
        }
    }
    for (auto& c : merged) c.undersized = c.size() < min_size;
    return merged;
}

Msa read_msa_fasta(std::istream& in) {
    Msa msa;
    std::string line, id, body;
    bool in_record = false;
    auto normalize_row = [](const std::string& raw, const std::string& rec_id) {
        std::string row;
        row.reserve(raw.size());
        for (char ch : raw) {
            unsigned char u = static_cast<unsigned char>(ch);
            if (std::isspace(u) || std::isdigit(u)) continue;
            if (ch == '-' || ch == '.') {
                row.push_back('-');
                continue;
            }
            char c = static_cast<char>(std::toupper(u));
            if (c == 'T') c = 'U';
            if (!is_residue(c))
                throw make_error(Errc::invalid_residue,
                                 "invalid symbol '" + std::string(1, ch) + "' in alignment row '" +
                                     rec_id + "'",
                                 0, ch, rec_id);
            row.push_back(c);
        }
        return row;
    };
    auto flush = [&]() {
        if (!in_record) return;
        std::string row = normalize_row(body, id);
        if (row.empty())
            throw make_error(Errc::empty_record, "alignment row '" + id + "' is empty", 0, 0, id);
        msa.ids.push_back(id);
        msa.rows.push_back(std::move(row));
        body.clear();
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '>') {
            flush();
            in_record = true;
            std::string header = line.substr(1);
            id = header.substr(0, header.find_first_of(" \t"));
        } else if (in_record) {
            body += line;
        }
    }
    flush();
    if (msa.rows.empty()) throw make_error(Errc::empty_input, "empty alignment");
    for (const auto& row : msa.rows)
        if (row.size() != msa.rows[0].size())
            throw make_error(Errc::invalid_argument, "alignment rows have unequal length");
    return msa;
}

Msa read_msa_fasta_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw make_error(Errc::io_failure, "cannot open '" + path + "'");
    return read_msa_fasta(in);
}

void write_msa_fasta(const Msa& msa, std::ostream& out) {
    for (std::size_t i = 0; i < msa.depth(); ++i) {
        out << '>' << msa.ids[i] << '\n';
        const std::string& r = msa.rows[i];
        for (std::size_t c = 0; c < r.size(); c += 60) out << r.substr(c, 60) << '\n';
    }
}

void write_msa_clustal(const Msa& msa, std::ostream& out) {
    out << "mirkit multiple sequence alignment\n\n";
    std::size_t width = 0;
    for (const auto& id : msa.ids) width = std::max(width, id.size());
    width += 4;

    std::vector<std::size_t> printed(msa.depth(), 0);
    for (std::size_t start = 0; start < msa.columns(); start += 60) {
        std::size_t len = std::min<std::size_t>(60, msa.columns() - start);
        for (std::size_t i = 0; i < msa.depth(); ++i) {
            std::string slice = msa.rows[i].substr(start, len);
            for (char c : slice)
                if (c != '-') ++printed[i];
            out << msa.ids[i] << std::string(width - msa.ids[i].size(), ' ') << slice << ' '
                << printed[i] << '\n';
        }
        out << std::string(width, ' ');
        for (std::size_t c = start; c < start + len; ++c) {
            char first = msa.rows[0][c];
            bool conserved = first != '-';
            for (std::size_t i = 1; conserved && i < msa.depth(); ++i)
                conserved = msa.rows[i][c] == first;
            out << (conserved ? '*' : ' ');
        }
        out << '\n';
        if (start + 60 < msa.columns()) out << '\n';
    }
}

void write_cluster_report(const std::vector<Cluster>& clusters, std::ostream& out) {
    out << "# mirkit clusters\n";
    out << "# cluster_index\tsize\tflag\tids\n";
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        out << (i + 1) << '\t' << clusters[i].size() << '\t'
            << (clusters[i].undersized ? "undersized" : "ok") << '\t';
        for (std::size_t k = 0; k < clusters[i].ids.size(); ++k) {
            if (k) out << ',';
            out << clusters[i].ids[k];
        }
        out << '\n';
    }
}

}  // namespace mirkit
