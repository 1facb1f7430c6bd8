#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace bls {

// Model parameters of the free Bose gas on Z^d: dimension, inverse
// temperature and chemical potential. The continuous-time simple random
// walk jumps with total rate 1 (rate 1/(2d) per direction).
struct ModelParams {
    int d = 3;
    double beta = 1.0;
    double mu = 0.0;

    void validate() const {
        if (d < 1) throw std::invalid_argument("ModelParams: d must be >= 1");
        if (!(beta > 0)) throw std::invalid_argument("ModelParams: beta must be > 0");
        if (mu > 0) throw std::invalid_argument("ModelParams: mu must be <= 0");
    }
    // Series that need transience (Green's function, rho_c at mu=0).
    void require_transient() const {
        if (d <= 2)
            throw std::domain_error("operation requires d >= 3 (walk recurrent for d <= 2)");
    }
};

using Site = std::vector<int32_t>;

inline Site origin(int d) { return Site(static_cast<size_t>(d), 0); }

inline void check_dim(const ModelParams& p, std::span<const int32_t> x) {
    if (static_cast<int>(x.size()) != p.d)
        throw std::invalid_argument("site dimension does not match ModelParams.d");
}

// Packs a site into a single 64-bit key. Coordinates must fit the per-axis
// budget (21 bits signed for d<=3, 16 bits for d=4); enough for every
// desk-scale simulation in this project.
inline uint64_t pack_site(std::span<const int32_t> x) {
    const size_t d = x.size();
    if (d <= 3) {
        uint64_t key = 0;
        for (size_t i = 0; i < d; ++i) {
            int64_t c = x[i] + (1 << 20);
            key = (key << 21) | static_cast<uint64_t>(c & 0x1FFFFF);
        }
        return key | (static_cast<uint64_t>(d) << 61);
    }
    if (d == 4) {
        uint64_t key = 0;
        for (size_t i = 0; i < 4; ++i) {
            int64_t c = x[i] + (1 << 15);
            key = (key << 16) | static_cast<uint64_t>(c & 0xFFFF);
        }
        return key;
    }
    throw std::invalid_argument("pack_site: d > 4 not supported");
}

// A finite set of lattice sites with O(1) membership tests.
class SiteSet {
  public:
    SiteSet() = default;
    explicit SiteSet(std::vector<Site> sites) : sites_(std::move(sites)) {
        for (const auto& s : sites_) keys_.insert(pack_site(s));
    }

    bool contains(std::span<const int32_t> x) const {
        return !keys_.empty() && keys_.count(pack_site(x)) > 0;
    }
    bool contains_key(uint64_t k) const { return keys_.count(k) > 0; }
    bool empty() const { return sites_.empty(); }
    size_t size() const { return sites_.size(); }
    const std::vector<Site>& sites() const { return sites_; }

    // lattice ball of radius r (Euclidean) around the origin
    static SiteSet ball(int d, int radius);
    // axis-aligned box [-h, h]^d
    static SiteSet box(int d, int halfside);
    static SiteSet point(int d) { return SiteSet({origin(d)}); }

    int diameter() const;  // max Euclidean distance between members, rounded up

  private:
    std::vector<Site> sites_;
    std::unordered_set<uint64_t> keys_;
};

}  // namespace bls
