# Robust MDP qualitative solver package
