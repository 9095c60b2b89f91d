#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mirkit/align.hpp"
#include "mirkit/seq.hpp"

namespace mirkit {

/// Symmetric pairwise-distance matrix, entries in [0,1], zero diagonal.
struct DistanceMatrix {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> d;

    std::size_t size() const noexcept { return ids.size(); }
};

/// d[i][j] = 1 - fractional_identity(global_align(seq_i, seq_j)). Cells are
/// independent; `threads` > 1 parallelizes with identical results.
DistanceMatrix distance_matrix(std::span<const SeqRecord> seqs, const ScoringScheme& scheme,
                               unsigned threads = 1);

/// Rooted binary guide tree. Nodes 0..n-1 are leaves (label set = matrix
/// ids); internal nodes reference two children with non-negative branch
/// lengths.
struct GuideTree {
    struct Node {
        int left = -1;
        int right = -1;
        double left_length = 0.0;
        double right_length = 0.0;
        std::string label;       // leaves only
        std::size_t leaf_count = 1;
    };

    std::vector<Node> nodes;
    int root = -1;

    bool is_leaf(int idx) const { return nodes[idx].left < 0; }
    std::size_t leaf_count() const { return root < 0 ? 0 : nodes[root].leaf_count; }
    std::vector<std::string> leaf_labels(int idx) const;
    std::string to_newick() const;  // branch lengths with 6 decimals
};

/// Neighbor-joining agglomeration (Q-criterion), deterministic: exact ties
/// pick the smallest index pair, negative branch lengths clamp to 0. The
/// final two nodes join under the root; a leaf paired with an internal node
/// receives the full remaining distance (the internal side gets 0), two
/// leaves split it evenly.
GuideTree build_guide_tree(const DistanceMatrix& dm);

struct Msa {
    std::vector<std::string> ids;
    std::vector<std::string> rows;  // gapped, equal length

    std::size_t columns() const noexcept { return rows.empty() ? 0 : rows[0].size(); }
    std::size_t depth() const noexcept { return rows.size(); }
    std::string degapped(std::size_t row) const;
    int row_of(std::string_view id) const;  // -1 when absent

    /// 1-based residue position -> 1-based column of that row.
    std::size_t column_of(std::size_t row, std::size_t pos) const;
};

/// Progressive alignment along the guide tree (post-order, profile-profile
/// merges, once-a-gap-always-a-gap). Row order follows the input sequences.
Msa progressive_msa(std::span<const SeqRecord> seqs, const GuideTree& tree,
                    const ScoringScheme& scheme);

struct Cluster {
    std::vector<std::string> ids;
    bool undersized = false;

    std::size_t size() const noexcept { return ids.size(); }
};

/// Deepest-first guide-tree cut: a subtree is emitted once its leaf count is
/// <= max_size; undersized clusters (< min_size) merge with the neighbouring
/// cluster in emission order while the merged size stays within max_size,
/// otherwise they are flagged. The clusters partition the leaves.
std::vector<Cluster> extract_clusters(const GuideTree& tree, std::size_t min_size = 8,
                                      std::size_t max_size = 27);

void write_msa_fasta(const Msa& msa, std::ostream& out);

/// Aligned-FASTA reader: residues normalize like sequence input, '-' and '.'
/// are kept as gaps, and all rows must have equal length.
Msa read_msa_fasta(std::istream& in);
Msa read_msa_fasta_file(const std::string& path);

/// Clustal-like display: 60-column blocks, rows of
/// `id<padding>slice<space>cumulative-count`, and a '*' marker line under the
/// fully conserved columns.
void write_msa_clustal(const Msa& msa, std::ostream& out);

void write_cluster_report(const std::vector<Cluster>& clusters, std::ostream& out);

}  // namespace mirkit
