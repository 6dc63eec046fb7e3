#include "limbmap/cli.hpp"

int main(int argc, char** argv) { return limbmap::run_cli(argc, argv); }
