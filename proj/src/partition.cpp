#include "scatteropt/partition.hpp"
#include "scatteropt/errors.hpp"

#include <string>

namespace scatteropt {

namespace {

// Marks every index of `blocks` in `seen`; throws on out-of-range or repeat.
void check_cover(const std::vector<std::vector<int>>& blocks, int n, const char* side) {
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (int idx : blocks[b]) {
            if (idx < 0 || idx >= n)
                throw CoverageError(std::string(side) + " block " + std::to_string(b) +
                                    ": index " + std::to_string(idx) + " out of range [0, " +
                                    std::to_string(n) + ")");
            if (count[static_cast<std::size_t>(idx)]++)
                throw CoverageError(std::string(side) + " partition: index " +
                                    std::to_string(idx) + " appears more than once");
        }
    }
    for (int i = 0; i < n; ++i)
        if (!count[static_cast<std::size_t>(i)])
            throw CoverageError(std::string(side) + " partition: index " +
                                std::to_string(i) + " unhoused");
}

} // namespace

void validate_partition(const IndexPartition& p) {
    if (p.n_total <= 0)
        throw CoverageError("partition covers no indices (n_total = " +
                            std::to_string(p.n_total) + ")");
    check_cover(p.cr_blocks, p.n_total, "CR");
    check_cover(p.li_blocks, p.n_total, "LI");
    if (p.li_io_split.size() != p.li_blocks.size())
        throw SplitError("expected " + std::to_string(p.li_blocks.size()) +
                         " i/o splits, got " + std::to_string(p.li_io_split.size()));
    for (std::size_t l = 0; l < p.li_blocks.size(); ++l) {
        const IoSplit& s = p.li_io_split[l];
        if (s.n_in < 0 || s.n_out < 0 ||
            s.n_in + s.n_out != static_cast<int>(p.li_blocks[l].size()))
            throw SplitError("LI block " + std::to_string(l) + ": split (" +
                             std::to_string(s.n_in) + ", " + std::to_string(s.n_out) +
                             ") does not sum to block length " +
                             std::to_string(p.li_blocks[l].size()));
    }
}

PartitionMaps build_maps(const IndexPartition& p) {
    PartitionMaps m;
    const auto n = static_cast<std::size_t>(p.n_total);
    m.cr_of_index.assign(n, -1);
    m.li_of_index.assign(n, -1);
    m.li_pos_of_index.assign(n, -1);
    m.cr_pos_of_index.assign(n, -1);
    for (std::size_t k = 0; k < p.cr_blocks.size(); ++k)
        for (std::size_t j = 0; j < p.cr_blocks[k].size(); ++j) {
            m.cr_of_index[static_cast<std::size_t>(p.cr_blocks[k][j])] = static_cast<int>(k);
            m.cr_pos_of_index[static_cast<std::size_t>(p.cr_blocks[k][j])] = static_cast<int>(j);
        }
    for (std::size_t l = 0; l < p.li_blocks.size(); ++l)
        for (std::size_t j = 0; j < p.li_blocks[l].size(); ++j) {
            m.li_of_index[static_cast<std::size_t>(p.li_blocks[l][j])] = static_cast<int>(l);
            m.li_pos_of_index[static_cast<std::size_t>(p.li_blocks[l][j])] = static_cast<int>(j);
        }
    return m;
}

} // namespace scatteropt
