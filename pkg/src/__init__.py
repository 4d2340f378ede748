# delta-stone: flat modules imported by name from src
