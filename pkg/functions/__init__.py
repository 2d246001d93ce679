"""
Tracking library:
* box geometry and the track/detection types
* colour histograms and the fused association costs
* Hungarian assignment and Kalman motion model
* the tracker, detector and CLEAR MOT evaluator
* synthetic scenes, configuration and overlay drawing
"""
