#include "t2v/cli/run.hpp"

int main(int argc, char** argv) { return t2v::run_cli(argc, argv); }
