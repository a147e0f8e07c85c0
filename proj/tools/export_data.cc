// Writes the shipped architecture and benchmark files into a directory.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cascade/benchmarks.hh"

int main(int argc, char **argv)
{
    CLI::App app{"export the bundled architecture and benchmarks"};
    std::string dir = "data";
    app.add_option("dir", dir, "output directory");
    CLI11_PARSE(app, argc, argv);

    auto put = [&](const std::string &name, const std::string &text) {
        std::ofstream out(dir + "/" + name, std::ios::binary);
        if (!out) {
            std::cerr << "cannot write " << dir << "/" << name << "\n";
            std::exit(1);
        }
        out << text;
    };
    put("cgra8x8.json", cascade::default_arch_file());
    for (auto *set : {&cascade::dense_benchmarks, &cascade::sparse_benchmarks})
        for (auto &[name, g] : (*set)()) put(name + ".json", cascade::serialize_app(g));
    return 0;
}
