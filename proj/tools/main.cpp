#include <arrowscore/cli.hpp>

int main(int argc, char** argv) { return arrowscore::cli::run(argc, argv); }
