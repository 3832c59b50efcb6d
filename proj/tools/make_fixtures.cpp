// Regenerates the exact stationary fixtures used by oracle-check.

#include "bdex/oracle.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "tests/fixtures";
    std::filesystem::create_directories(dir);
    struct Spec {
        const char* name;
        int d, N;
        double a, b_minus, b_plus;
    };
    const Spec specs[] = {
        {"d1_N2.json", 1, 2, 0.5, 0.8, 0.2},
        {"d1_N3.json", 1, 3, -0.3, 0.7, 0.1},
        {"d2_N2.json", 2, 2, 0.7, 0.9, 0.3},
    };
    for (const auto& s : specs) {
        bdex::write_fixture((dir / s.name).string(), bdex::compute_fixture(s.d, s.N, s.a, s.b_minus, s.b_plus));
        std::cout << "wrote " << (dir / s.name).string() << '\n';
    }
    return 0;
}
