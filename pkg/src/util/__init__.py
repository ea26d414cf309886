# util package