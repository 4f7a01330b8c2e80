// Fits every estimator to one table and prints a comparison.
//
//   sample_estimate [x11 x10 x01]

#include <cstdlib>
#include <iostream>

#include "drs/drs.hpp"

int main(int argc, char** argv) {
    drs::count_t x[3] = {50, 30, 20};
    if (argc == 4)
        for (int i = 0; i < 3; ++i) x[i] = std::atoll(argv[i + 1]);
    const drs::DualRecordTable t(x[0], x[1], x[2]);

    for (const char* s : {"dse", "pl-mt", "mpl-mt", "pl-mtb", "adpl-mtb:fixed:0.99", "adpl-mtb:scaled:1.25",
                          "adpl-mtb:recapture:4", "adpl-mt:fixed:0.99"}) {
        try {
            const auto r = drs::estimate(drs::EstimatorSpec::parse(s), t);
            std::cout << s << "\t" << drs::io::fixed(r.n_hat, 3);
            if (r.phi_hat) std::cout << "\tphi_hat=" << drs::io::fixed(*r.phi_hat, 3);
            if (r.degenerate) std::cout << "\t(lower bound)";
            std::cout << "\n";
        } catch (const drs::EstimationError& e) {
            std::cout << s << "\tfailed: " << e.what() << "\n";
        }
    }
}
