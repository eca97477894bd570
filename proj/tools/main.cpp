#include <iostream>
int main() { std::cout << "varplap\n"; return 0; }
