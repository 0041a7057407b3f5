"""fqi-air: offline reinforcement learning under action impact regularity"""
