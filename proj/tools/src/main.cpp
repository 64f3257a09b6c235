#include "polykam_cli/app.hpp"

int main(int argc, char** argv) { return polykam::cli::run(argc, argv); }
