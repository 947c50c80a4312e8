// Drift, entropy and boundary dimension of simple random walk on F_2.

#include <cstdio>

#include "dimcons/dimcons.hpp"

int main() {
    using namespace dimcons;
    const auto mu = FactorMeasure::srw(2);

    const auto drift = drift_estimate(mu, 2000, 200, 1);
    std::printf("drift    %.4f +- %.4f  (closed form %.4f)\n", drift.estimate, drift.std_error, radial_drift(mu));

    const auto h = entropy_rate(mu, EntropyParams{EntropyMethod::ExactRadial, 1000, 0, 1});
    std::printf("entropy  %.4f            (closed form %.4f)\n", h.estimate, closed_form_entropy(mu)->value);

    const auto pts = boundary_samples(mu, 24, 20000, 1);
    DimensionFitParams fp;
    fp.centers = 2000;
    const auto fit = dimension_fit(pts, fp);
    std::printf("dim      %.4f            (h/l = %.4f)\n", fit.slope, std::log(3.0));
}
