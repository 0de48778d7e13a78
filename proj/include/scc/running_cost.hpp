#pragma once

// Running cost l on the state space with its growth certificate
//   c1 |w|^alpha - c2 <= l(w) <= c3 (|w|^alpha + 1).

#include "scc/geometry.hpp"

#include <json.hpp>

#include <array>
#include <string>

namespace scc {

struct GrowthCertificate {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double alpha = 0.0;
};

class RunningCost {
public:
    enum class Kind { Linear, Power };

    /// l(w) = c . w
    static RunningCost linear(Vector c);
    /// l(w) = c |w|^alpha
    static RunningCost power(double c, double alpha);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const Vector& coefficients() const noexcept { return coef_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] double exponent() const noexcept { return alpha_; }
    [[nodiscard]] const GrowthCertificate& certificate() const noexcept { return cert_; }
    void set_certificate(const GrowthCertificate& cert) { cert_ = cert; }
    /// Fills in a valid certificate for the cone (linear costs need W).
    void derive_certificate(const PolyCone& w_cone);

    [[nodiscard]] double operator()(const Vector& w) const;

    /// int_{t0}^{t0+h} e^{-gamma t} l(w(t)) dt along the segment w(t0) = wa,
    /// w(t0 + h) = wb. Exact for linear costs and for alpha in {0, 2};
    /// 8-point Gauss-Legendre otherwise.
    [[nodiscard]] double discounted_segment(double gamma, double t0, double h, const Vector& wa,
                                            const Vector& wb) const;
    /// Same with lead = e^{-gamma t0} h and moments[m] = exp_moment(m, gamma h)
    /// supplied by the caller (exact branches only; power costs with other
    /// exponents need gamma and h).
    [[nodiscard]] bool has_closed_form() const noexcept {
        return kind_ == Kind::Linear || alpha_ == 0.0 || alpha_ == 2.0;
    }
    [[nodiscard]] double discounted_segment(double lead, const std::array<double, 3>& moments, const Vector& wa,
                                            const Vector& wb) const;

    [[nodiscard]] std::string describe() const;

private:
    Kind kind_ = Kind::Linear;
    Vector coef_;
    double scale_ = 1.0;
    double alpha_ = 1.0;
    GrowthCertificate cert_;
};

struct GrowthReport {
    double worst_lower_slack = 0.0;  // min of l(w) - (c1 |w|^alpha - c2)
    double worst_upper_slack = 0.0;  // min of c3 (|w|^alpha + 1) - l(w)
    double worst_radius = 0.0;       // radius of the worst point overall
    int samples = 0;
    bool pass = false;
};

/// Samples 10^4 cone points spread over radii {0.1, 1, 10, 100}.
GrowthReport validate_growth(const RunningCost& cost, const PolyCone& w_cone, std::uint64_t seed = 1);

RunningCost running_cost_from_json(const nlohmann::json& j, const PolyCone& w_cone);
nlohmann::json to_json(const RunningCost& cost);

}  // namespace scc
