#include "diffpath/cli.hpp"

int main(int argc, char** argv) { return diffpath::run_command(argc, argv); }
