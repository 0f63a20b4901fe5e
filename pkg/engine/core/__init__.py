"""Pure numerical and exact-arithmetic building blocks."""
