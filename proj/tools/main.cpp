#include "dualmind/cli.hpp"

int main(int argc, char** argv) { return dualmind::cli::run(argc, argv); }
