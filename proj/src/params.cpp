#include "bls/params.hpp"

#include <cmath>

namespace bls {

namespace {

void enumerate_box(int d, int h, Site& cur, size_t axis, std::vector<Site>& out) {
    if (axis == static_cast<size_t>(d)) {
        out.push_back(cur);
        return;
    }
    for (int c = -h; c <= h; ++c) {
        cur[axis] = c;
        enumerate_box(d, h, cur, axis + 1, out);
    }
}

}  // namespace

SiteSet SiteSet::ball(int d, int radius) {
    std::vector<Site> all;
    Site cur(static_cast<size_t>(d), 0);
    enumerate_box(d, radius, cur, 0, all);
    std::vector<Site> kept;
    const int64_t r2 = static_cast<int64_t>(radius) * radius;
    for (auto& s : all) {
        int64_t q = 0;
        for (int32_t c : s) q += static_cast<int64_t>(c) * c;
        if (q <= r2) kept.push_back(std::move(s));
    }
    return SiteSet(std::move(kept));
}

SiteSet SiteSet::box(int d, int halfside) {
    std::vector<Site> all;
    Site cur(static_cast<size_t>(d), 0);
    enumerate_box(d, halfside, cur, 0, all);
    return SiteSet(std::move(all));
}

int SiteSet::diameter() const {
    int64_t best = 0;
    for (size_t i = 0; i < sites_.size(); ++i)
        for (size_t j = i + 1; j < sites_.size(); ++j) {
            int64_t q = 0;
            for (size_t k = 0; k < sites_[i].size(); ++k) {
                const int64_t diff =
                    static_cast<int64_t>(sites_[i][k]) - sites_[j][k];
                q += diff * diff;
            }
            best = std::max(best, q);
        }
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(best))));
}

}  // namespace bls
