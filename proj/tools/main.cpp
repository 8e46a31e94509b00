#include "commands.hpp"

int main(int argc, char** argv) { return sdcnn::cli::run(argc, argv); }
