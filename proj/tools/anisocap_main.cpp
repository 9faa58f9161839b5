#include "anisocap/cli.hpp"

int main(int argc, char** argv) { return anisocap::run_cli(argc, argv); }
