#pragma once

#include <vector>

namespace scatteropt {

/// Input/output split of one linear-interconnection block.
struct IoSplit {
    int n_in = 0;
    int n_out = 0;
};

/// The dual partitioning of N global scalar indices: once into K
/// constitutive-relation blocks and once into L linear-interconnection
/// blocks. Blocks hold ordered lists of global indices; an LI block lists
/// its input indices first, then its output indices.
struct IndexPartition {
    int n_total = 0;
    std::vector<std::vector<int>> cr_blocks;
    std::vector<std::vector<int>> li_blocks;
    std::vector<IoSplit> li_io_split;

    int num_cr() const { return static_cast<int>(cr_blocks.size()); }
    int num_li() const { return static_cast<int>(li_blocks.size()); }
};

/// Throws CoverageError if any global index is missed or duplicated by
/// either partitioning, SplitError if an i/o split disagrees with its
/// block length (or splits are missing).
void validate_partition(const IndexPartition& p);

/// Block lookup tables, valid for a validated partition.
struct PartitionMaps {
    std::vector<int> cr_of_index;   // global index -> CR block
    std::vector<int> li_of_index;   // global index -> LI block
    std::vector<int> li_pos_of_index; // global index -> position within its LI block
    std::vector<int> cr_pos_of_index; // global index -> position within its CR block
};

PartitionMaps build_maps(const IndexPartition& p);

} // namespace scatteropt
