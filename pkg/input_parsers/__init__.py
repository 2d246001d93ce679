"""Reading and writing detection, ground truth, track, scene and frame files."""
