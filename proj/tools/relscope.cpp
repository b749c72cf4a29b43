#include "relscope/cli.hpp"

int main(int argc, char** argv) { return relscope::run_command(argc, argv); }
