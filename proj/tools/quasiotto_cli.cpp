#include "quasiotto/cli.hpp"

int main(int argc, char** argv) { return qo::cli::main_entry(argc, argv); }
