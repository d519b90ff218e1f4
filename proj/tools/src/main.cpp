#include <igpk_cli/cli.hpp>

int main(int argc, char** argv) { return igpk::cli::run(argc, argv); }
