#pragma once

#include <string>
#include <vector>

#include "bslab/numerics.hpp"

namespace bslab {

// One evaluated sufficient condition: verdict = computed < threshold.
struct EnclosureCertificate {
    std::string kind;
    double computed = 0.0;
    double threshold = 0.0;
    bool verdict = false;
    double margin = 0.0; // threshold - computed
    std::string note;

    static EnclosureCertificate make(std::string kind, double computed, double threshold, std::string note = {})
    {
        EnclosureCertificate c;
        c.kind = std::move(kind);
        c.computed = computed;
        c.threshold = threshold;
        c.verdict = computed < threshold;
        c.margin = threshold - computed;
        c.note = std::move(note);
        return c;
    }
};

enum class Method { bs_root, fd_oracle };
std::string to_string(Method m);

struct EigenEntry {
    cplx lambda;
    double residual = 0.0; // |mu + 1| for bs_root, resolution drift for fd_oracle
    Method method = Method::bs_root;
    int grid_n = 0;
    double extent = 0.0; // L or R
    double k_norm = 0.0; // ||K(lambda)|| when known
    cplx lambda_coarse;  // value at N (bs) or raw value at N (fd)
};

struct Candidate {
    cplx lambda;
    std::string reason;
};

struct SpectralReport {
    std::vector<EigenEntry> eigenvalues;
    std::vector<Candidate> rejected;
    std::vector<EnclosureCertificate> certificates;
    std::string method;
    int grid_n = 0;
    double extent = 0.0;
    double tolerance = 0.0;
};

} // namespace bslab
