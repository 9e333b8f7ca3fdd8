def solution(table_data):
    n = count(table_data)
    while n:
        n = subtract(n, 1)
    return n
