#pragma once

#include <string>
#include <vector>

#include "n2/modules.hpp"

namespace n2 {

enum class ResolutionVariant {
    AffineVerma,      // Verma chain on the affine side
    AffineParabolic,  // generalized Verma chain on the affine side
    N2Chiral,         // chiral Verma chain with flow twists
    N2Parabolic,      // generalized Verma chain with flow twists
    N2Relaxed,        // typical Verma chain with flow twists
};

std::string variant_name(ResolutionVariant v);
std::optional<ResolutionVariant> variant_from_name(const std::string& s);

struct ResolutionSpec {
    ResolutionVariant variant = ResolutionVariant::N2Parabolic;
    Parameters params{2, 1};
    long r = 1;
    long s = 0;
    QQ j;            // relaxed variant only
    int depth = -1;  // -1: choose automatically against the truncation
};

struct BggSummand {
    PresentationPtr pres;
    QQ theta;
    std::string label;
};

struct BggTerm {
    int n = 0;  // homological degree; sign (-1)^n
    std::vector<BggSummand> summands;
};

// Terms 0..depth of the resolution (term 0 is the untwisted head).
std::vector<BggTerm> bgg_complex(const ResolutionSpec& spec, int depth);

struct EulerEntry {
    Weight w;  // absolute (L0, charge)
    long euler = 0;
    long simple = 0;
};

struct EulerReport {
    bool match = false;
    int depth_used = 0;
    std::vector<EulerEntry> entries;
    std::vector<std::string> term_labels;
    std::vector<std::optional<QQ>> term_lowest;  // lowest L0-head offset in the box
    bool lowest_strictly_increasing = true;
    bool subsingular_seen = false;
    std::vector<std::string> warnings;
};

// Euler-characteristic verification at finite truncation: compares
// sum_n (-1)^n ch(term n, flowed) against the simple character of the head
// quotient, entry by entry on the truncation box.
EulerReport verify_euler(const ResolutionSpec& spec, const Truncation& trunc);

}  // namespace n2
