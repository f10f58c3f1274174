# Selector, optimizer and training loop
