#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace diffrec {

// Scorer family. PBS and HTS are the pure endpoints; HHP blends them with a
// global lambda; OHHP and DCB assign lambda per item from its degree.
enum class Algo { PBS, HTS, HHP, OHHP, DCB };

inline const char* algo_name(Algo a) {
    switch (a) {
        case Algo::PBS: return "PBS";
        case Algo::HTS: return "HTS";
        case Algo::HHP: return "HHP";
        case Algo::OHHP: return "OHHP";
        case Algo::DCB: return "DCB";
    }
    return "?";
}

// Coefficients of the combined exponential a*e^(b*x) + c*e^(d*x).
struct FitCoeffs {
    double a = 0, b = 0, c = 0, d = 0;

    double eval(double x) const { return a * std::exp(b * x) + c * std::exp(d * x); }

    friend bool operator==(const FitCoeffs&, const FitCoeffs&) = default;
};

// Which scorer to run plus exactly the parameters that scorer needs.
// k_min/k_max are the training graph's item-degree bounds used to normalize
// individual item degrees (OHHP uses k_max only, DCB uses both).
struct AlgorithmSpec {
    Algo kind = Algo::PBS;
    double lambda = 0.0;  // HHP
    double gamma = 0.0;   // OHHP
    FitCoeffs coeffs;     // DCB
    int k_min = 0;
    int k_max = 0;

    static AlgorithmSpec pbs() { return {Algo::PBS}; }
    static AlgorithmSpec hts() { return {Algo::HTS}; }
    static AlgorithmSpec hhp(double lambda) {
        AlgorithmSpec s{Algo::HHP};
        s.lambda = lambda;
        return s;
    }
    static AlgorithmSpec ohhp(double gamma, int k_max) {
        AlgorithmSpec s{Algo::OHHP};
        s.gamma = gamma;
        s.k_min = 1;
        s.k_max = k_max;
        return s;
    }
    static AlgorithmSpec dcb(FitCoeffs coeffs, int k_min, int k_max) {
        AlgorithmSpec s{Algo::DCB};
        s.coeffs = coeffs;
        s.k_min = k_min;
        s.k_max = k_max;
        return s;
    }

    void validate() const {
        switch (kind) {
            case Algo::PBS:
            case Algo::HTS:
                break;
            case Algo::HHP:
                if (!(lambda >= 0.0 && lambda <= 1.0))
                    throw std::invalid_argument("AlgorithmSpec: HHP lambda must be in [0,1]");
                break;
            case Algo::OHHP:
                if (!(gamma >= 0.0)) throw std::invalid_argument("AlgorithmSpec: OHHP gamma must be >= 0");
                if (k_max < 1) throw std::invalid_argument("AlgorithmSpec: OHHP needs k_max >= 1");
                break;
            case Algo::DCB:
                if (!(k_min < k_max))
                    throw std::invalid_argument("AlgorithmSpec: DCB needs k_min < k_max");
                break;
        }
    }

    bool per_item() const { return kind == Algo::OHHP || kind == Algo::DCB; }

    std::string name() const {
        char buf[64];
        switch (kind) {
            case Algo::HHP:
                std::snprintf(buf, sizeof buf, "HHP(lambda=%.4g)", lambda);
                return buf;
            case Algo::OHHP:
                std::snprintf(buf, sizeof buf, "OHHP(gamma=%.4g)", gamma);
                return buf;
            default:
                return algo_name(kind);
        }
    }
};

// Hybridization parameter of one source item, from its training degree.
// OHHP: (k/k_max)^gamma; DCB: the fitted curve on the min-max normalized
// degree. Clamped to [0,1] so the extremes stay exactly PBS/HTS even when
// the fitted curve exits the unit band at its edges.
inline double per_item_lambda(const AlgorithmSpec& spec, int k_beta) {
    double lam;
    if (spec.kind == Algo::OHHP) {
        lam = std::pow(static_cast<double>(k_beta) / spec.k_max, spec.gamma);
    } else if (spec.kind == Algo::DCB) {
        double kt = spec.k_max > spec.k_min
                        ? (static_cast<double>(k_beta) - spec.k_min) / (spec.k_max - spec.k_min)
                        : 0.0;
        kt = std::clamp(kt, 0.0, 1.0);
        lam = spec.coeffs.eval(kt);
    } else {
        throw std::invalid_argument("per_item_lambda: spec has a global lambda");
    }
    return std::clamp(lam, 0.0, 1.0);
}

}  // namespace diffrec
