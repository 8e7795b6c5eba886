#include <visilab/cli.hpp>

int main(int argc, char** argv) {
    return visilab::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
